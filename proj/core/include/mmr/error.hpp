#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverlappingIds : public Error {
 public:
  using Error::Error;
};

class NonRoadEdge : public Error {
 public:
  using Error::Error;
};

class TransitOverCapacity : public Error {
 public:
  using Error::Error;
};

class UnknownAgent : public Error {
 public:
  using Error::Error;
};

class NoPath : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class EmptyZones : public Error {
 public:
  using Error::Error;
};

class ZeroBest : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario document. `where()` names the offending line or field.
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Scenario parsed but failed validation; carries every finding.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> findings)
      : Error(summarize(findings)), findings_(std::move(findings)) {}
  const std::vector<std::string>& findings() const noexcept { return findings_; }

 private:
  static std::string summarize(const std::vector<std::string>& findings) {
    std::string out = std::to_string(findings.size()) + " validation finding(s)";
    for (const auto& f : findings) out += "\n  " + f;
    return out;
  }
  std::vector<std::string> findings_;
};

}  // namespace mmr
