#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace mmr {

inline constexpr double kSecondsPerDay = 86400.0;

enum class Mode : std::uint8_t { Walk = 0, Bike = 1, Car = 2, Transit = 3 };

inline constexpr std::array<Mode, 4> kAllModes{Mode::Walk, Mode::Bike, Mode::Car, Mode::Transit};

constexpr std::size_t index_of(Mode m) { return static_cast<std::size_t>(m); }

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

/// Small bit set over Mode.
class ModeSet {
 public:
  constexpr ModeSet() = default;
  constexpr ModeSet(std::initializer_list<Mode> modes) {
    for (Mode m : modes) insert(m);
  }
  static constexpr ModeSet from_bits(std::uint8_t bits) {
    ModeSet s;
    s.bits_ = bits & 0x0f;
    return s;
  }

  constexpr bool contains(Mode m) const { return (bits_ >> index_of(m)) & 1u; }
  constexpr void insert(Mode m) { bits_ |= static_cast<std::uint8_t>(1u << index_of(m)); }
  constexpr void erase(Mode m) { bits_ &= static_cast<std::uint8_t>(~(1u << index_of(m))); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr std::size_t size() const {
    std::size_t n = 0;
    for (Mode m : kAllModes) n += contains(m) ? 1 : 0;
    return n;
  }
  constexpr bool is_subset_of(ModeSet other) const { return (bits_ & ~other.bits_) == 0; }

  friend constexpr ModeSet operator|(ModeSet a, ModeSet b) { return from_bits(a.bits_ | b.bits_); }
  friend constexpr ModeSet operator&(ModeSet a, ModeSet b) { return from_bits(a.bits_ & b.bits_); }
  friend constexpr bool operator==(ModeSet, ModeSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

/// "car+transit"; "none" for the empty set.
std::string to_string(ModeSet modes);

/// Integer identifier tagged with the concept it names.
template <typename Tag>
struct StrongId {
  std::int64_t value = 0;
  friend constexpr auto operator<=>(const StrongId&, const StrongId&) = default;
};

using NodeId = StrongId<struct NodeTag>;
using EdgeId = StrongId<struct EdgeTag>;
using LineId = StrongId<struct LineTag>;
using AgentId = StrongId<struct AgentTag>;

/// Projected planar coordinates in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace mmr

template <typename Tag>
struct std::hash<mmr::StrongId<Tag>> {
  std::size_t operator()(const mmr::StrongId<Tag>& id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
