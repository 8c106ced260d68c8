#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "qnorm/spatial/world.hpp"

namespace qnorm::spatial {

enum class TrustBand { Low = 0, Mid = 1, High = 2 };

inline TrustBand trust_band(double trust) {
  if (trust < 1.0 / 3.0) return TrustBand::Low;
  if (trust < 2.0 / 3.0) return TrustBand::Mid;
  return TrustBand::High;
}

inline std::string_view to_string(TrustBand b) {
  switch (b) {
    case TrustBand::Low: return "low";
    case TrustBand::Mid: return "mid";
    case TrustBand::High: return "high";
  }
  return "?";
}

// [trust band][event kind]
inline constexpr std::array<std::array<std::string_view, 3>, 3> kCommentaryTemplates{{
    {{"I go where I'm told, for now.",
      "Nobody is looking. I'll take the long way.",
      "Caught again. The Watcher never sleeps."}},
    {{"Right on time. It's easier this way.",
      "Just a small detour, nothing more.",
      "Fair enough. I should have known better."}},
    {{"This is where I belong at this hour.",
      "Even I need a change of scenery sometimes.",
      "The rules are there for a reason. Back to School."}},
}};

inline std::string_view commentary_template(TrustBand band, EventKind kind) {
  return kCommentaryTemplates[static_cast<std::size_t>(band)][static_cast<std::size_t>(kind)];
}

inline std::string commentary(const BehaviorProfile& profile, EventKind kind) {
  return std::string(commentary_template(trust_band(profile.trust), kind));
}

// "step 12 agent 3 deviate Park: <text>"
inline std::string commentary_line(const AgentEvent& e, std::string_view text) {
  std::string line = "step " + std::to_string(e.step) + " agent " + std::to_string(e.agent) + " ";
  line += to_string(e.kind);
  line += " ";
  line += to_string(e.place);
  line += ": ";
  line += text;
  return line;
}

inline std::vector<std::string> stub_commentary(const std::vector<AgentEvent>& events) {
  std::vector<std::string> lines;
  lines.reserve(events.size());
  for (const auto& e : events) lines.push_back(commentary_line(e, commentary(e.profile, e.kind)));
  return lines;
}

}  // namespace qnorm::spatial
