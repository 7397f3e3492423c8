#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "causalqa/answerer.hpp"
#include "causalqa/datagen.hpp"
#include "causalqa/experiment.hpp"

namespace causalqa {

/// Contents of a run-config JSON file.  Keys:
///   n_contexts, m_samples, repeats, seed, answerer, extractor, method,
///   temperature, max_tokens, parallel, variant, answer_mode, remote{...}
/// Unknown keys are rejected.
struct RunConfig {
  EvalConfig eval;
  GenConfig gen;
  std::optional<RemoteConfig> remote;
};

/// Throws UsageError naming the offending key.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace causalqa
