#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/diagnostics.hpp"
#include "causalqa/modes.hpp"
#include "causalqa/scm.hpp"
#include "causalqa/templates.hpp"

namespace causalqa {

/// `plan <mode> [train E, ...] test E [contexts N]`.
struct PlanDecl {
  GeneralizationMode mode = GeneralizationMode::InDomain;
  std::vector<Edge> train;  // empty when the block omits `train`
  Edge test;
  std::optional<int> contexts;
  SourceSpan span;
};

/// Syntax tree of a world file.  Declarations of each kind keep source order.
struct WorldFile {
  SourceSpan world_span;
  ModelSpec model;  // name, exo, var and edge declarations
  std::optional<Template> context;
  std::vector<EffectPhrases> asks;
  std::vector<InterventionTemplate> ask_ifs;
  std::vector<PlanDecl> plans;
};

struct ParseResult {
  std::optional<WorldFile> file;
  std::vector<Diagnostic> diagnostics;
  bool ok() const noexcept { return file.has_value(); }
};

/// Lexical, syntax and reference checking.  Never throws on bad input.
ParseResult parse(std::string_view source);

struct World {
  CausalModel model;
  TemplateSet templates;
  std::vector<PlanDecl> plans;
  const std::string& name() const noexcept { return model.name(); }
};

struct LowerResult {
  std::optional<World> world;
  std::vector<Diagnostic> diagnostics;
  bool ok() const noexcept { return world.has_value(); }
};

/// Type checking, model validation and template/plan consistency.
LowerResult lower(const WorldFile& file);

/// Training edges implied by a chain-shaped plan that omits `train`:
/// inductive A->C trains {A->B, B->C}; deductive-cause B->C trains
/// {A->C, A->B}; deductive-effect A->B trains {A->C, B->C}; in-domain trains
/// the test edge.  Nullopt when no such chain exists among `edges`.
std::optional<std::vector<Edge>> default_train_edges(GeneralizationMode mode, const Edge& test,
                                                     const std::vector<Edge>& edges);

/// Canonical pretty-printed source.
std::string render(const WorldFile& file);

/// parse + lower; throws ModelError (diagnostics rendered against `filename`).
World load_world(std::string_view source, std::string_view filename = "<world>");
World load_world_file(const std::filesystem::path& path);

}  // namespace causalqa
