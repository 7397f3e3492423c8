#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "causalqa/dsl.hpp"

namespace causalqa {

std::optional<std::vector<Edge>> default_train_edges(GeneralizationMode mode, const Edge& test,
                                                     const std::vector<Edge>& edges) {
  auto has = [&](const std::string& c, const std::string& e) {
    return std::find(edges.begin(), edges.end(), Edge{c, e}) != edges.end();
  };
  std::vector<std::string> names;
  for (const auto& e : edges)
    for (const auto* n : {&e.cause, &e.effect})
      if (std::find(names.begin(), names.end(), *n) == names.end()) names.push_back(*n);

  switch (mode) {
    case GeneralizationMode::InDomain:
      return std::vector<Edge>{test};
    case GeneralizationMode::Inductive:
      for (const auto& b : names)
        if (b != test.cause && b != test.effect && has(test.cause, b) && has(b, test.effect))
          return std::vector<Edge>{{test.cause, b}, {b, test.effect}};
      return std::nullopt;
    case GeneralizationMode::DeductiveCauseBased:
      for (const auto& a : names)
        if (a != test.cause && a != test.effect && has(a, test.effect) && has(a, test.cause))
          return std::vector<Edge>{{a, test.effect}, {a, test.cause}};
      return std::nullopt;
    case GeneralizationMode::DeductiveEffectBased:
      for (const auto& c : names)
        if (c != test.cause && c != test.effect && has(test.cause, c) && has(test.effect, c))
          return std::vector<Edge>{{test.cause, c}, {test.effect, c}};
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

namespace {

struct Lowerer {
  const WorldFile& wf;
  std::vector<Diagnostic> diags;

  void error(DiagKind k, SourceSpan s, std::string msg) {
    diags.push_back({k, s, std::string(kind_name(k)) + ": " + std::move(msg)});
  }

  std::optional<VarType> var_type(const std::string& n) const {
    for (const auto& v : wf.model.endogenous)
      if (v.name == n) return v.type;
    return std::nullopt;
  }

  std::optional<ValueType> exo_type(const std::string& n) const {
    for (const auto& x : wf.model.exogenous)
      if (x.name == n) return value_type(x.dist);
    return std::nullopt;
  }

  bool is_bool(const std::string& n) const {
    if (auto t = var_type(n)) return *t == VarType::Bool;
    return exo_type(n) == ValueType::Bool;
  }

  void check_template(const Template& t, bool cf_allowed, const std::string& where) {
    for (const auto& s : t.segments) {
      const SourceSpan at{t.span.line, t.span.column + 1 + s.offset, static_cast<int>(s.name.size()) + 2};
      if (s.kind == Segment::Kind::CfQuestion && !cf_allowed)
        error(DiagKind::Definition, at, "'{cf_question}' is only allowed in ask_if templates (" + where + ")");
      if (s.kind == Segment::Kind::Choice && !is_bool(s.name))
        error(DiagKind::Type, at, "choice placeholder '{" + s.name + "|...}' needs a boolean variable (" + where + ")");
    }
  }

  void check_templates() {
    if (!wf.context) {
      error(DiagKind::Definition, wf.world_span, "world has no 'context' declaration");
    } else {
      check_template(*wf.context, false, "context");
    }
    std::set<std::string> asked;
    for (const auto& a : wf.asks) {
      if (!asked.insert(a.effect).second) error(DiagKind::Definition, a.span, "duplicate 'ask' for '" + a.effect + "'");
      if (!is_bool(a.effect)) error(DiagKind::Type, a.span, "'ask' effect '" + a.effect + "' is not boolean");
      for (const auto* t : {&a.question, &a.cf_question, &a.yes, &a.no, &a.cf_yes, &a.cf_no})
        check_template(*t, false, "ask " + a.effect);
    }
    std::set<std::tuple<std::string, bool, std::string>> keys;
    std::set<std::string> intervened;
    for (const auto& t : wf.ask_ifs) {
      if (!keys.insert({t.cause, t.forced, t.effect}).second)
        error(DiagKind::Definition, t.span, "duplicate 'ask_if' for " + t.cause + "=" + (t.forced ? "true" : "false") +
                                                " about " + t.effect);
      if (!is_bool(t.cause)) error(DiagKind::Type, t.span, "'ask_if' cause '" + t.cause + "' is not boolean");
      if (t.effect == kAnyEffect && !t.text.has_cf_slot())
        error(DiagKind::Definition, t.span, "'ask_if ... about *' template must contain '{cf_question}'");
      check_template(t.text, true, "ask_if " + t.cause);
      intervened.insert(t.cause);
    }
    for (std::size_t i = 0; i < wf.model.edges.size(); ++i) {
      const auto& e = wf.model.edges[i];
      const SourceSpan s = wf.model.edge_spans.size() > i ? wf.model.edge_spans[i] : SourceSpan{};
      if (!asked.count(e.effect)) error(DiagKind::Definition, s, "edge " + to_string(e) + " has no 'ask' for its effect");
      if (!intervened.count(e.cause)) error(DiagKind::Definition, s, "edge " + to_string(e) + " has no 'ask_if' for its cause");
    }
  }

  void check_plans() {
    for (const auto& p : wf.plans) {
      const std::string m(mode_name(p.mode));
      switch (p.mode) {
        case GeneralizationMode::InDomain:
          if (!p.train.empty() && !(p.train.size() == 1 && p.train[0] == p.test))
            error(DiagKind::Definition, p.span, "in-domain plan must train on its test edge");
          break;
        case GeneralizationMode::CommonCause:
        case GeneralizationMode::CommonEffect: {
          const bool cause = p.mode == GeneralizationMode::CommonCause;
          if (p.train.empty()) error(DiagKind::Definition, p.span, m + " plan needs 'train' edges");
          for (const auto& e : p.train) {
            const bool shares = cause ? e.cause == p.test.cause && e.effect != p.test.effect
                                      : e.effect == p.test.effect && e.cause != p.test.cause;
            if (!shares)
              error(DiagKind::Definition, p.span, m + " plan: training edge " + to_string(e) + " must share the " +
                                                      (cause ? "cause" : "effect") + " of test edge " + to_string(p.test) +
                                                      " and differ otherwise");
          }
          break;
        }
        default:
          if (p.train.empty() && !default_train_edges(p.mode, p.test, wf.model.edges))
            error(DiagKind::Definition, p.span, m + " plan omits 'train' but " + to_string(p.test) +
                                                    " is not part of a matching chain");
          if (std::find(p.train.begin(), p.train.end(), p.test) != p.train.end())
            error(DiagKind::Definition, p.span, m + " plan trains on its own test edge");
          break;
      }
    }
  }
};

}  // namespace

LowerResult lower(const WorldFile& file) {
  LowerResult result;
  Lowerer l{file, {}};
  l.diags = validate(file.model);
  l.check_templates();
  l.check_plans();
  if (!l.diags.empty()) {
    result.diagnostics = std::move(l.diags);
    return result;
  }
  World w{CausalModel::compile(file.model), {}, file.plans};
  w.templates.context = *file.context;
  w.templates.effects = file.asks;
  w.templates.interventions = file.ask_ifs;
  result.world = std::move(w);
  return result;
}

World load_world(std::string_view source, std::string_view filename) {
  auto parsed = parse(source);
  if (!parsed.ok()) throw ModelError(std::move(parsed.diagnostics), filename);
  auto lowered = lower(*parsed.file);
  if (!lowered.ok()) throw ModelError(std::move(lowered.diagnostics), filename);
  return std::move(*lowered.world);
}

World load_world_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open world file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_world(ss.str(), path.string());
}

}  // namespace causalqa
