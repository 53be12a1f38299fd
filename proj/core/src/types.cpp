#include "mmr/types.hpp"

namespace mmr {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Walk: return "walk";
    case Mode::Bike: return "bike";
    case Mode::Car: return "car";
    case Mode::Transit: return "transit";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name) {
  for (Mode m : kAllModes) {
    if (to_string(m) == name) return m;
  }
  if (name == "bus") return Mode::Transit;
  return std::nullopt;
}

std::string to_string(ModeSet modes) {
  std::string out;
  for (Mode m : kAllModes) {
    if (!modes.contains(m)) continue;
    if (!out.empty()) out += '+';
    out += to_string(m);
  }
  return out.empty() ? "none" : out;
}

}  // namespace mmr
