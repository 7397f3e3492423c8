#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace causalqa {

enum class GeneralizationMode {
  InDomain,
  CommonCause,
  CommonEffect,
  Inductive,
  DeductiveCauseBased,
  DeductiveEffectBased,
};

inline constexpr std::array<GeneralizationMode, 6> kAllModes = {
    GeneralizationMode::InDomain,  GeneralizationMode::CommonCause,
    GeneralizationMode::CommonEffect, GeneralizationMode::Inductive,
    GeneralizationMode::DeductiveCauseBased, GeneralizationMode::DeductiveEffectBased,
};

/// "in-domain", "common-cause", "common-effect", "inductive",
/// "deductive-cause", "deductive-effect".
std::string_view mode_name(GeneralizationMode m) noexcept;
std::optional<GeneralizationMode> parse_mode(std::string_view name) noexcept;

}  // namespace causalqa
