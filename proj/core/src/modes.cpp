#include "causalqa/modes.hpp"

namespace causalqa {

std::string_view mode_name(GeneralizationMode m) noexcept {
  switch (m) {
    case GeneralizationMode::InDomain: return "in-domain";
    case GeneralizationMode::CommonCause: return "common-cause";
    case GeneralizationMode::CommonEffect: return "common-effect";
    case GeneralizationMode::Inductive: return "inductive";
    case GeneralizationMode::DeductiveCauseBased: return "deductive-cause";
    case GeneralizationMode::DeductiveEffectBased: return "deductive-effect";
  }
  return "?";
}

std::optional<GeneralizationMode> parse_mode(std::string_view name) noexcept {
  for (auto m : kAllModes)
    if (mode_name(m) == name) return m;
  return std::nullopt;
}

}  // namespace causalqa
