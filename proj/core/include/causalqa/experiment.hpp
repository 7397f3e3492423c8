#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/answerer.hpp"
#include "causalqa/datagen.hpp"
#include "causalqa/metrics.hpp"
#include "causalqa/modes.hpp"
#include "causalqa/worlds.hpp"

namespace causalqa {

struct ExperimentPlan {
  std::string world;
  GeneralizationMode mode = GeneralizationMode::InDomain;
  std::vector<Edge> train_edges;
  Edge test_edge;
  std::size_t contexts_per_edge = 100;
};

struct PlanOverrides {
  std::optional<Edge> test;  // picks the world's plan with this test edge
  std::optional<std::vector<Edge>> train;
  std::optional<std::size_t> contexts_per_edge;
};

/// The world's plan block for `mode` (the first one unless `test` selects
/// another), with train edges derived when the block omits them.  Throws
/// UsageError when the mode is unavailable or an override is inconsistent.
ExperimentPlan plan(const World& world, GeneralizationMode mode, const PlanOverrides& overrides = {});

struct EvalConfig {
  std::size_t n_contexts = 100;
  std::size_t m_samples = 10;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::string answerer = "oracle";
  std::string extractor = "rule";  // "rule" or "remote"
  std::string method;              // report label; the answerer name when empty
  double temperature = 1.0;
  int max_tokens = 256;
  std::size_t parallelism = 1;

  void check() const;  // throws UsageError
};

/// Scores `answerer` on the plan's test edge.  Repeat r draws its contexts
/// from Rng(seed).split("repeat").split(r).split("contexts"); sample m of a
/// context answers both questions with one shared stream.
MetricsReport evaluate(const World& world, const ExperimentPlan& plan, const Answerer& answerer,
                       const EvalConfig& cfg, const Extractor& h = {});

/// Orders of the potential outcomes in the six listed unit types: either
/// (X, Y_x, Y_x') or (X, Y_x', Y_x).
enum class TupleOrder { YxFirst, YnxFirst };
std::string_view tuple_order_name(TupleOrder o) noexcept;  // "yx-first", "ynx-first"
std::optional<TupleOrder> parse_tuple_order(std::string_view s) noexcept;

/// Source of the six-unit world: exo `unit` uniform on 1..6, X holds for
/// units 1-3, edge X -> Y.
std::string illustrative_world_source(TupleOrder order);
World illustrative_world(TupleOrder order);

struct SweepRow {
  AnswererKind kind = AnswererKind::UniformlyCorrect;
  double eps = 0;     // the family's nominal error level
  double lambda = 0;
  std::array<double, kMetricCount> values{};  // expectations; NaN when undefined
  double get(Metric m) const noexcept { return values[static_cast<std::size_t>(m)]; }
};

/// Noise applied for a family at level eps.  The factually correct family
/// spends its whole budget on counterfactual answers (rate parameter 2*eps)
/// so that its Avg-ER matches the other two.
NoiseSpec sweep_noise(AnswererKind kind, double eps, double lambda);

/// Exact expectations on the six-unit world by enumerating unit types and
/// flip outcomes.  PN and PS columns are population ratios.
std::array<double, kMetricCount> expected_metrics(TupleOrder order, const NoiseSpec& noise);
std::vector<SweepRow> sweep_fig3(std::span<const double> eps_levels, std::span<const double> lambda_grid,
                                 TupleOrder order);
std::string sweep_csv(std::span<const SweepRow> rows, TupleOrder order);

/// Normalized score table: mode,method,avg_er,avg_ir,worlds.
std::string normalized_csv(std::span<const NormalizedScore> scores);
/// Fixed-width text rendering of the same table with two decimals.
std::string normalized_table(std::span<const NormalizedScore> scores);

/// Datasets for every train edge of a plan, concatenated in plan order.
enum class Algorithm { Sft, Dpo, Ccf };
std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept;  // "sft", "dpo", "ccf"
DatasetFormat dataset_format(Algorithm a) noexcept;
struct GenOutput {
  Dataset data;
  std::vector<std::string> warnings;
};
GenOutput generate(const World& world, std::span<const Edge> edges, Algorithm alg, const GenConfig& cfg,
                            const Answerer* model, const Generator& gen = {}, const Extractor& h = {});

}  // namespace causalqa
