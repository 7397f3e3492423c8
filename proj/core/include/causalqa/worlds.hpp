#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/dsl.hpp"
#include "causalqa/modes.hpp"

namespace causalqa {

enum class BuiltinWorldId {
  CandyBipartite,
  CandyChainNde,
  CandyChainWde,
  Healthcare,
  Engineering,
  MathDownload,
};

inline constexpr std::array<BuiltinWorldId, 6> kBuiltinWorlds = {
    BuiltinWorldId::CandyBipartite, BuiltinWorldId::CandyChainNde, BuiltinWorldId::CandyChainWde,
    BuiltinWorldId::Healthcare,     BuiltinWorldId::Engineering,   BuiltinWorldId::MathDownload,
};

/// "candy-bipartite", "candy-chain-nde", ... as used on the command line.
std::string_view world_id_name(BuiltinWorldId id) noexcept;
std::optional<BuiltinWorldId> parse_world_id(std::string_view name) noexcept;
/// File name under worlds/, e.g. "candy1.world".
std::string_view world_file_name(BuiltinWorldId id) noexcept;

/// Source text of the shipped world file.
std::string_view builtin_source(BuiltinWorldId id);
/// Compiled-in fixture; never fails for shipped files.
World load_builtin(BuiltinWorldId id);

/// Modes that have a plan block in the world.
std::set<GeneralizationMode> availability(const World& world);
std::set<GeneralizationMode> availability(BuiltinWorldId id);

/// A builtin id or a path to a world file.
World resolve_world(std::string_view id_or_path);

struct FaultMeans {
  std::string fault_class;
  double x_mean = 0;
  double y_mean = 0;
  double z_mean = 0;
};

/// Reads `fault_class,x_mean,y_mean,z_mean`; throws ModelError with the line
/// number on malformed rows.
std::vector<FaultMeans> parse_means_csv(std::string_view text);

/// World file text for the transmission-line fault model with the given mean
/// table (fault classes equiprobable).  The shipped engineering.world is this
/// function applied to the shipped means.csv.
std::string render_engineering_world(const std::vector<FaultMeans>& means);

}  // namespace causalqa
