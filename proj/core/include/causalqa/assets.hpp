#pragma once

#include <optional>
#include <string_view>
#include <vector>

// Text assets compiled into the library: the shipped world files, the
// engineering means table and the versioned extractor/generator prompts.
namespace causalqa::assets {

std::optional<std::string_view> find(std::string_view name);
std::vector<std::string_view> names();

}  // namespace causalqa::assets
