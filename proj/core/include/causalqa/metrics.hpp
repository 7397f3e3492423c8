#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/scm.hpp"

namespace causalqa {

enum class Relation { N, S, AN, AS };
inline constexpr std::array<Relation, 4> kRelations{Relation::N, Relation::S, Relation::AN, Relation::AS};
std::string_view relation_name(Relation r) noexcept;

enum class CauseEffectClass { Occurs, OccursNot, Irrelevant };
std::string_view class_name(CauseEffectClass c) noexcept;

/// N lives on X and Y, S on not X and not Y, AN on not X and Y, AS on X and
/// not Y.  Inside its cell a relation occurs when the counterfactual flips Y.
CauseEffectClass classify(Relation r, bool x, bool y, bool y_cf) noexcept;

/// One answered unit.  Estimates are nullopt when the answer was undecidable.
struct UnitEval {
  UnitOutcome outcome;
  std::optional<bool> y_hat;
  std::optional<bool> y_cf_hat;
  std::size_t sample_index = 0;
};

/// Estimates with undecidable answers replaced by the complement of the truth.
bool scored_y_hat(const UnitEval& u) noexcept;
bool scored_y_cf_hat(const UnitEval& u) noexcept;

struct ErrorRates {
  double f_er = 0, cf_er = 0, avg_er = 0;
};
struct InconsistencyRates {
  double n_ir = 0, s_ir = 0, an_ir = 0, as_ir = 0, avg_ir = 0;
};
struct PnPs {
  std::optional<double> pn, ps;  // absent when the conditioning set is empty
};

/// Throw UsageError on empty input.
ErrorRates error_rates(std::span<const UnitEval> units);
InconsistencyRates inconsistency_rates(std::span<const UnitEval> units);
PnPs pn_ps(std::span<const UnitEval> units, bool use_estimates);

/// Number of relations whose estimated class matches the true class.
int ccf_reward(bool x, bool y, bool y_cf, bool y_hat, bool y_cf_hat) noexcept;

/// Metric columns in report order.
enum class Metric { FEr, CfEr, AvgEr, NIr, SIr, AnIr, AsIr, AvgIr, PnHat, PsHat, PnTrue, PsTrue };
inline constexpr std::size_t kMetricCount = 12;
inline constexpr std::array<Metric, kMetricCount> kMetrics{
    Metric::FEr,  Metric::CfEr, Metric::AvgEr, Metric::NIr,   Metric::SIr,   Metric::AnIr,
    Metric::AsIr, Metric::AvgIr, Metric::PnHat, Metric::PsHat, Metric::PnTrue, Metric::PsTrue};
std::string_view metric_name(Metric m) noexcept;
std::optional<Metric> parse_metric(std::string_view name) noexcept;

/// Metrics of one sample index of one repeat.
struct SampleMetrics {
  std::array<std::optional<double>, kMetricCount> values{};
  std::optional<double> get(Metric m) const noexcept { return values[static_cast<std::size_t>(m)]; }
};

SampleMetrics sample_metrics(std::span<const UnitEval> units);

struct RunMeta {
  std::string world;
  std::string mode;
  std::string edge;    // "A->D"
  std::string method;  // answerer or method label
  std::vector<std::uint64_t> seeds;
  friend bool operator==(const RunMeta&, const RunMeta&) = default;
};

struct Stat {
  double mean = 0;
  double std = 0;  // population
  std::size_t count = 0;
  bool present() const noexcept { return count > 0; }
};

struct MetricsReport {
  RunMeta meta;
  std::array<Stat, kMetricCount> stats{};
  std::size_t undecidable = 0;             // undecidable answers over the whole run
  std::size_t failed = 0;                  // answerer calls that errored (scored as undecidable)
  std::vector<std::size_t> flagged_repeats;  // repeats with more than 10% undecidable answers
  const Stat& get(Metric m) const noexcept { return stats[static_cast<std::size_t>(m)]; }
  Stat& get(Metric m) noexcept { return stats[static_cast<std::size_t>(m)]; }
};

struct SampleReport {
  RunMeta meta;
  SampleMetrics metrics;
};

/// Mean and population std of each metric over the given samples.  Absent
/// values are skipped and lower that metric's count.  Throws UsageError on
/// empty input or mismatched world/mode/edge/method.
MetricsReport aggregate(std::span<const SampleReport> samples);

struct NormalizedScore {
  std::string mode;
  std::string method;
  double avg_er = 0;
  double avg_ir = 0;
  std::size_t worlds = 0;
};

/// Each method's Avg-ER and Avg-IR divided by the base method's on the same
/// (world, mode), then averaged over worlds.  Sorted by (mode, method).
/// Throws UsageError when a base is missing or has a zero mean.
std::vector<NormalizedScore> normalize(std::span<const MetricsReport> reports, std::string_view base_method);

/// Long CSV: world,mode,edge,method,metric,mean,std,count.  Absent metrics
/// have empty mean/std and count 0.
inline constexpr std::string_view kReportCsvHeader = "world,mode,edge,method,metric,mean,std,count";
std::string to_csv(std::span<const MetricsReport> reports, bool header = true);
/// Inverse of to_csv (seeds, undecidable counts and flags are not carried).
/// Throws UsageError naming the line on malformed input.
std::vector<MetricsReport> parse_report_csv(std::string_view text);
std::string to_json(const MetricsReport& report);

std::string format_number(double v);

}  // namespace causalqa
