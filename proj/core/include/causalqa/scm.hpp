#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "causalqa/diagnostics.hpp"
#include "causalqa/expr.hpp"
#include "causalqa/rng.hpp"
#include "causalqa/value.hpp"

namespace causalqa {

/// A probability or weight, kept as a ratio so files render back unchanged.
struct Weight {
  double num = 0.0;
  double den = 1.0;
  double value() const noexcept { return num / den; }
  friend bool operator==(const Weight&, const Weight&) = default;
};

struct UniformInt {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Gaussian draw.  With round_digits >= 0 the draw is rounded to that many
/// decimals before storage; `positive` resamples until the stored value is > 0.
struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
  int round_digits = -1;
  bool positive = false;
};

struct Bernoulli {
  Weight p;
};

struct Categorical {
  std::vector<std::pair<std::string, Weight>> weights;
};

struct CaseArm;

/// Selects the first arm whose guard holds.  Guards see exogenous variables
/// drawn earlier and endogenous variables computable from them.
struct CaseDist {
  std::vector<CaseArm> arms;
};

using Distribution = std::variant<UniformInt, Normal, Bernoulli, Categorical, CaseDist>;

struct CaseArm {
  Expr guard;  // literal `true` for an `else` arm
  bool is_else = false;
  Distribution dist;
};

struct ExogenousSpec {
  std::string name;
  Distribution dist;
  SourceSpan span;
};

enum class VarType { Bool, Number };

struct EndogenousSpec {
  std::string name;
  VarType type = VarType::Bool;
  Expr equation;
  SourceSpan span;
};

struct Edge {
  std::string cause;
  std::string effect;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

std::string to_string(const Edge& e);  // "A->D"
/// Parses "A->D" or "A:D".
std::optional<Edge> parse_edge(std::string_view text);

struct ModelSpec {
  std::string name;
  std::vector<ExogenousSpec> exogenous;
  std::vector<EndogenousSpec> endogenous;
  std::vector<Edge> edges;
  std::vector<SourceSpan> edge_spans;  // optional, parallel to edges
};

/// Value type produced by a distribution, or nullopt when case arms disagree.
std::optional<ValueType> value_type(const Distribution& d);

/// Structural checks: unique names, parameter ranges, reference resolution,
/// definition order, case-guard availability, expression types and edges.
std::vector<Diagnostic> validate(const ModelSpec& spec);

/// A validated model with every reference bound for fast evaluation.  The
/// evaluation environment holds the exogenous values followed by the
/// endogenous values, both in declaration order.
class CausalModel {
 public:
  /// Throws ModelError carrying the diagnostics of validate().
  static CausalModel compile(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  const std::string& name() const noexcept { return spec_.name; }
  const std::vector<ExogenousSpec>& exogenous() const noexcept { return spec_.exogenous; }
  const std::vector<EndogenousSpec>& endogenous() const noexcept { return spec_.endogenous; }
  const std::vector<Edge>& edges() const noexcept { return spec_.edges; }

  std::optional<std::size_t> exo_index(std::string_view name) const;
  std::optional<std::size_t> endo_index(std::string_view name) const;
  bool has_edge(const Edge& e) const;
  ValueType exo_type(std::size_t i) const { return exo_types_[i]; }
  /// Fixed decimals used when a real exogenous value is rendered (-1: shortest).
  int display_decimals(std::size_t exo) const { return decimals_[exo]; }

  /// Endogenous variables each case guard of exogenous `i` depends on, in
  /// evaluation order (empty for guards over exogenous values only).
  const std::vector<std::size_t>& guard_prerequisites(std::size_t i) const { return guard_deps_[i]; }

 private:
  ModelSpec spec_;
  std::vector<ValueType> exo_types_;
  std::vector<int> decimals_;
  std::vector<std::vector<std::size_t>> guard_deps_;
};

/// One realization of the exogenous variables, aligned with model.exogenous().
struct Context {
  std::uint64_t id = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t draw_index = 0;
  std::vector<Value> values;

  friend bool operator==(const Context&, const Context&) = default;
};

/// Draws a context from `rng` (ancestral, declaration order).
Context sample_context(const CausalModel& model, Rng& rng);
/// Context number `index` of the run keyed by `master`: drawn from
/// master.split(index); id and draw_index are `index`.
Context sample_context(const CausalModel& model, const Rng& master, std::uint64_t index);

/// Builds a context from explicit values (by exogenous name); throws
/// UsageError unless the names match the model exactly.
Context make_context(const CausalModel& model,
                     const std::vector<std::pair<std::string, Value>>& values,
                     std::uint64_t id = 0);

/// Throws UsageError if the context does not belong to the model.
void check_context(const CausalModel& model, const Context& ctx);

struct Intervention {
  std::string target;
  bool forced = false;
};

/// Endogenous values in declaration order.
struct Assignment {
  std::vector<Value> values;

  bool truth(std::size_t endo) const { return std::get<bool>(values[endo]); }
};

Assignment evaluate(const CausalModel& model, const Context& ctx);
/// Throws UsageError for duplicate, unknown or non-boolean targets.
Assignment evaluate_under(const CausalModel& model, const Context& ctx,
                          std::span<const Intervention> interventions);

/// Boolean value of endogenous `name` within an assignment.
bool truth_of(const CausalModel& model, const Assignment& a, std::string_view name);

struct UnitOutcome {
  std::uint64_t context_id = 0;
  std::string cause;
  std::string effect;
  bool x = false;
  bool y = false;
  bool y_cf = false;

  friend bool operator==(const UnitOutcome&, const UnitOutcome&) = default;
};

/// Throws UsageError if the edge is not declared.
UnitOutcome potential_outcomes(const CausalModel& model, const Context& ctx, const Edge& edge);

}  // namespace causalqa
