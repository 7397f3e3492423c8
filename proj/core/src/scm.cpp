#include "causalqa/scm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace causalqa {

std::string to_string(const Edge& e) { return e.cause + "->" + e.effect; }

std::optional<Edge> parse_edge(std::string_view text) {
  auto sep = text.find("->");
  std::size_t len = 2;
  if (sep == std::string_view::npos) {
    sep = text.find(':');
    len = 1;
  }
  if (sep == std::string_view::npos) return std::nullopt;
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return std::string(s);
  };
  Edge e{trim(text.substr(0, sep)), trim(text.substr(sep + len))};
  if (e.cause.empty() || e.effect.empty()) return std::nullopt;
  return e;
}

std::optional<ValueType> value_type(const Distribution& d) {
  switch (d.index()) {
    case 0: return ValueType::Int;
    case 1: return ValueType::Real;
    case 2: return ValueType::Bool;
    case 3: return ValueType::Label;
    default: {
      const auto& arms = std::get<CaseDist>(d).arms;
      if (arms.empty()) return std::nullopt;
      auto t = value_type(arms.front().dist);
      for (const auto& a : arms)
        if (value_type(a.dist) != t) return std::nullopt;
      return t;
    }
  }
}

namespace {

void labels_of(const Distribution& d, std::set<std::string>& out) {
  if (const auto* c = std::get_if<Categorical>(&d)) {
    for (const auto& [label, w] : c->weights) out.insert(label);
  } else if (const auto* cs = std::get_if<CaseDist>(&d)) {
    for (const auto& a : cs->arms) labels_of(a.dist, out);
  }
}

int decimals_of(const Distribution& d) {
  if (const auto* n = std::get_if<Normal>(&d)) return n->round_digits;
  if (const auto* cs = std::get_if<CaseDist>(&d)) {
    int best = -1;
    for (const auto& a : cs->arms) best = std::max(best, decimals_of(a.dist));
    return best;
  }
  return -1;
}

struct Validator {
  const ModelSpec& spec;
  std::vector<Diagnostic> diags;
  std::map<std::string, std::size_t, std::less<>> exo_idx, endo_idx;
  std::vector<std::optional<ValueType>> exo_t, endo_t;
  // Exogenous variables each endogenous variable transitively depends on;
  // nullopt when the dependency set cannot be established.
  std::vector<std::optional<std::set<std::size_t>>> endo_exo_deps;

  void error(DiagKind k, SourceSpan s, std::string msg) {
    diags.push_back({k, s, std::string(kind_name(k)) + ": " + std::move(msg)});
  }

  std::optional<ValueType> type_of_name(std::string_view n) const {
    if (auto it = exo_idx.find(n); it != exo_idx.end()) return exo_t[it->second];
    if (auto it = endo_idx.find(n); it != endo_idx.end()) return endo_t[it->second];
    return std::nullopt;
  }

  void check_weight(const Weight& w, SourceSpan s, const std::string& what) {
    if (!(w.den > 0) || !std::isfinite(w.num) || !std::isfinite(w.den))
      error(DiagKind::Definition, s, what + ": invalid ratio");
  }

  void check_dist(const Distribution& d, const ExogenousSpec& x, std::size_t i) {
    const SourceSpan s = x.span;
    const std::string who = "distribution of '" + x.name + "'";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, UniformInt>) {
            if (v.lo > v.hi) error(DiagKind::Definition, s, who + ": uniform_int needs lo <= hi");
          } else if constexpr (std::is_same_v<T, Normal>) {
            if (!(v.sigma > 0) || !std::isfinite(v.sigma) || !std::isfinite(v.mu))
              error(DiagKind::Definition, s, who + ": normal needs a finite mu and sigma > 0");
            if (v.round_digits > 12) error(DiagKind::Definition, s, who + ": round supports at most 12 digits");
            if (v.positive && v.mu + 8 * v.sigma <= 0)
              error(DiagKind::Definition, s, who + ": positive normal has negligible mass above zero");
          } else if constexpr (std::is_same_v<T, Bernoulli>) {
            check_weight(v.p, s, who);
            const double p = v.p.value();
            if (!(p >= 0.0 && p <= 1.0)) error(DiagKind::Definition, s, who + ": bernoulli needs 0 <= p <= 1");
          } else if constexpr (std::is_same_v<T, Categorical>) {
            if (v.weights.empty()) error(DiagKind::Definition, s, who + ": categorical needs at least one label");
            double sum = 0;
            std::set<std::string> seen;
            for (const auto& [label, w] : v.weights) {
              check_weight(w, s, who);
              if (!(w.value() > 0)) error(DiagKind::Definition, s, who + ": weight of '" + label + "' must be > 0");
              if (!seen.insert(label).second) error(DiagKind::Definition, s, who + ": duplicate label '" + label + "'");
              sum += w.value();
            }
            if (std::fabs(sum - 1.0) > 1e-9)
              error(DiagKind::Definition, s, who + ": categorical weights sum to " + render_value(sum) + ", not 1");
          } else {
            if (v.arms.empty()) error(DiagKind::Definition, s, who + ": case needs at least one arm");
            for (std::size_t a = 0; a < v.arms.size(); ++a) {
              const auto& arm = v.arms[a];
              if (arm.is_else && a + 1 != v.arms.size())
                error(DiagKind::Definition, arm.guard.span.line ? arm.guard.span : s, who + ": 'else' must be the last arm");
              check_guard(arm.guard, x, i);
              check_dist(arm.dist, x, i);
            }
            if (!value_type(d)) error(DiagKind::Type, s, who + ": case arms produce different value types");
          }
        },
        d);
  }

  void check_guard(const Expr& g, const ExogenousSpec& x, std::size_t i) {
    const SourceSpan s = g.span.line ? g.span : x.span;
    bool names_ok = true;
    for (const auto& n : referenced_names(g)) {
      if (auto it = exo_idx.find(n); it != exo_idx.end()) {
        if (it->second >= i) {
          error(DiagKind::Definition, s, "case guard of '" + x.name + "' references '" + n +
                                             "', which is not drawn before it");
          names_ok = false;
        }
      } else if (auto jt = endo_idx.find(n); jt != endo_idx.end()) {
        const auto& deps = endo_exo_deps[jt->second];
        const bool ready = deps && std::all_of(deps->begin(), deps->end(), [&](std::size_t k) { return k < i; });
        if (!ready) {
          error(DiagKind::Definition, s, "case guard of '" + x.name + "' references '" + n +
                                             "', which depends on exogenous values not drawn before it");
          names_ok = false;
        }
      } else {
        error(DiagKind::Reference, s, "undeclared name '" + n + "' in case guard of '" + x.name + "'");
        names_ok = false;
      }
    }
    if (!names_ok) return;
    check_typed(g, ValueType::Bool, "case guard of '" + x.name + "'");
  }

  void check_labels(const Expr& e) {
    if (e.op == Op::Eq || e.op == Op::Ne) {
      for (int side = 0; side < 2; ++side) {
        const Expr& r = e.args[side];
        const Expr& l = e.args[1 - side];
        if (r.op != Op::Ref || l.op != Op::Literal || l.literal.index() != 3) continue;
        auto it = exo_idx.find(r.name);
        if (it == exo_idx.end()) continue;
        std::set<std::string> labels;
        labels_of(spec.exogenous[it->second].dist, labels);
        const auto& lit = std::get<std::string>(l.literal);
        if (!labels.count(lit))
          error(DiagKind::Type, l.span, "'" + lit + "' is not a label of '" + r.name + "'");
      }
    }
    for (const auto& a : e.args) check_labels(a);
  }

  std::optional<ValueType> check_typed(const Expr& e, std::optional<ValueType> want, const std::string& what) {
    std::vector<Diagnostic> local;
    auto t = infer_type(e, [&](std::string_view n) { return type_of_name(n); }, local);
    diags.insert(diags.end(), local.begin(), local.end());
    check_labels(e);
    if (t && want && *t != *want)
      error(DiagKind::Type, e.span.line ? e.span : SourceSpan{}, what + " must be " +
                                                        std::string(type_name(*want)) + ", got " +
                                                        std::string(type_name(*t)));
    return t;
  }

  void run() {
    // Names.
    std::map<std::string, SourceSpan> first;
    auto declare = [&](const std::string& n, SourceSpan s) {
      auto [it, fresh] = first.emplace(n, s);
      if (!fresh)
        error(DiagKind::Definition, s, "duplicate declaration of '" + n + "' (first declared at line " +
                                           std::to_string(it->second.line) + ")");
      return fresh;
    };
    for (std::size_t i = 0; i < spec.exogenous.size(); ++i)
      if (declare(spec.exogenous[i].name, spec.exogenous[i].span)) exo_idx.emplace(spec.exogenous[i].name, i);
    for (std::size_t j = 0; j < spec.endogenous.size(); ++j)
      if (declare(spec.endogenous[j].name, spec.endogenous[j].span)) endo_idx.emplace(spec.endogenous[j].name, j);

    for (const auto& x : spec.exogenous) exo_t.push_back(value_type(x.dist));

    // Endogenous equations in definition order.
    endo_t.assign(spec.endogenous.size(), std::nullopt);
    endo_exo_deps.assign(spec.endogenous.size(), std::nullopt);
    for (std::size_t j = 0; j < spec.endogenous.size(); ++j) {
      const auto& v = spec.endogenous[j];
      endo_t[j] = v.type == VarType::Bool ? std::optional(ValueType::Bool) : std::nullopt;
      std::set<std::size_t> deps;
      bool ok = true;
      for (const auto& n : referenced_names(v.equation)) {
        if (auto it = exo_idx.find(n); it != exo_idx.end()) {
          deps.insert(it->second);
        } else if (auto jt = endo_idx.find(n); jt != endo_idx.end()) {
          if (jt->second == j) {
            error(DiagKind::Definition, v.span, "'" + v.name + "' references itself");
            ok = false;
          } else if (jt->second > j) {
            error(DiagKind::Definition, v.span, "'" + v.name + "' references '" + n + "', which is defined later");
            ok = false;
          } else if (endo_exo_deps[jt->second]) {
            deps.insert(endo_exo_deps[jt->second]->begin(), endo_exo_deps[jt->second]->end());
          } else {
            ok = false;
          }
        } else {
          error(DiagKind::Reference, v.span, "undeclared name '" + n + "' in equation of '" + v.name + "'");
          ok = false;
        }
      }
      if (!ok) continue;
      endo_exo_deps[j] = std::move(deps);
      const std::string what = "equation of '" + v.name + "'";
      if (v.type == VarType::Bool) {
        check_typed(v.equation, ValueType::Bool, what);
      } else {
        auto t = check_typed(v.equation, std::nullopt, what);
        if (t && (*t == ValueType::Bool || *t == ValueType::Label))
          error(DiagKind::Type, v.span, what + " is declared num but has type " + std::string(type_name(*t)));
        else
          endo_t[j] = t;
      }
    }

    for (std::size_t i = 0; i < spec.exogenous.size(); ++i) check_dist(spec.exogenous[i].dist, spec.exogenous[i], i);

    // Edges.
    std::set<Edge> seen;
    for (std::size_t k = 0; k < spec.edges.size(); ++k) {
      const auto& e = spec.edges[k];
      const SourceSpan s = k < spec.edge_spans.size() ? spec.edge_spans[k] : SourceSpan{};
      bool ok = true;
      for (const auto* n : {&e.cause, &e.effect}) {
        auto jt = endo_idx.find(*n);
        if (jt == endo_idx.end()) {
          error(exo_idx.count(*n) ? DiagKind::Definition : DiagKind::Reference, s,
                "edge " + to_string(e) + ": '" + *n + "' is not an endogenous variable");
          ok = false;
        } else if (spec.endogenous[jt->second].type != VarType::Bool) {
          error(DiagKind::Type, s, "edge " + to_string(e) + ": '" + *n + "' is not boolean");
          ok = false;
        }
      }
      if (ok && e.cause == e.effect) error(DiagKind::Definition, s, "edge " + to_string(e) + ": cause equals effect");
      else if (ok && !depends_on(endo_idx.at(e.effect), e.cause))
        error(DiagKind::Definition, s,
              "edge " + to_string(e) + ": '" + e.effect + "' does not depend on '" + e.cause + "'");
      if (!seen.insert(e).second) error(DiagKind::Definition, s, "duplicate edge " + to_string(e));
    }
  }

  // Whether endogenous j reads `cause`, directly or through earlier variables.
  bool depends_on(std::size_t j, const std::string& cause) const {
    std::set<std::string> seen;
    std::vector<std::string> todo = referenced_names(spec.endogenous[j].equation);
    while (!todo.empty()) {
      std::string n = std::move(todo.back());
      todo.pop_back();
      if (n == cause) return true;
      if (!seen.insert(n).second) continue;
      for (std::size_t k = 0; k < spec.endogenous.size(); ++k)
        if (spec.endogenous[k].name == n) {
          for (auto& r : referenced_names(spec.endogenous[k].equation)) todo.push_back(std::move(r));
          break;
        }
    }
    return false;
  }
};

}  // namespace

std::vector<Diagnostic> validate(const ModelSpec& spec) {
  Validator v{spec, {}, {}, {}, {}, {}, {}};
  v.run();
  return std::move(v.diags);
}

CausalModel CausalModel::compile(ModelSpec spec) {
  auto diags = validate(spec);
  if (!diags.empty()) throw ModelError(std::move(diags), spec.name.empty() ? "<model>" : spec.name);

  CausalModel m;
  m.spec_ = std::move(spec);
  const std::size_t E = m.spec_.exogenous.size();
  auto slot_of = [&m, E](std::string_view n) -> int {
    if (auto i = m.exo_index(n)) return static_cast<int>(*i);
    if (auto j = m.endo_index(n)) return static_cast<int>(E + *j);
    return -1;
  };
  for (auto& v : m.spec_.endogenous) bind_slots(v.equation, slot_of);

  std::function<void(Distribution&)> bind_dist = [&](Distribution& d) {
    if (auto* cs = std::get_if<CaseDist>(&d))
      for (auto& a : cs->arms) {
        bind_slots(a.guard, slot_of);
        bind_dist(a.dist);
      }
  };
  for (auto& x : m.spec_.exogenous) {
    bind_dist(x.dist);
    m.exo_types_.push_back(*value_type(x.dist));
    m.decimals_.push_back(decimals_of(x.dist));
  }

  // Endogenous prerequisites of each case guard (transitive closure).
  std::vector<std::vector<std::size_t>> direct(m.spec_.endogenous.size());
  for (std::size_t j = 0; j < m.spec_.endogenous.size(); ++j)
    for (const auto& n : referenced_names(m.spec_.endogenous[j].equation))
      if (auto k = m.endo_index(n)) direct[j].push_back(*k);
  for (const auto& x : m.spec_.exogenous) {
    std::set<std::size_t> need;
    std::function<void(const Distribution&)> walk = [&](const Distribution& d) {
      if (const auto* cs = std::get_if<CaseDist>(&d))
        for (const auto& a : cs->arms) {
          std::vector<std::size_t> stack;
          for (const auto& n : referenced_names(a.guard))
            if (auto k = m.endo_index(n)) stack.push_back(*k);
          while (!stack.empty()) {
            auto k = stack.back();
            stack.pop_back();
            if (need.insert(k).second) stack.insert(stack.end(), direct[k].begin(), direct[k].end());
          }
          walk(a.dist);
        }
    };
    walk(x.dist);
    m.guard_deps_.emplace_back(need.begin(), need.end());
  }
  return m;
}

std::optional<std::size_t> CausalModel::exo_index(std::string_view name) const {
  for (std::size_t i = 0; i < spec_.exogenous.size(); ++i)
    if (spec_.exogenous[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> CausalModel::endo_index(std::string_view name) const {
  for (std::size_t i = 0; i < spec_.endogenous.size(); ++i)
    if (spec_.endogenous[i].name == name) return i;
  return std::nullopt;
}

bool CausalModel::has_edge(const Edge& e) const {
  return std::find(spec_.edges.begin(), spec_.edges.end(), e) != spec_.edges.end();
}

namespace {

constexpr int kMaxResamples = 10000;

Value draw(const Distribution& d, const std::string& name, std::span<const Value> env, Rng& rng) {
  switch (d.index()) {
    case 0: {
      const auto& u = std::get<UniformInt>(d);
      return rng.uniform_int(u.lo, u.hi);
    }
    case 1: {
      const auto& n = std::get<Normal>(d);
      for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        double v = rng.normal(n.mu, n.sigma);
        if (n.round_digits >= 0) {
          const double scale = std::pow(10.0, n.round_digits);
          v = std::round(v * scale) / scale;
        }
        if (!n.positive || v > 0) return v;
      }
      throw ModelError("positive normal for '" + name + "' kept drawing values <= 0");
    }
    case 2:
      return rng.bernoulli(std::get<Bernoulli>(d).p.value());
    case 3: {
      const auto& c = std::get<Categorical>(d);
      const double u = rng.uniform();
      double cum = 0;
      for (const auto& [label, w] : c.weights) {
        cum += w.value();
        if (u < cum) return label;
      }
      return c.weights.back().first;
    }
    default: {
      for (const auto& arm : std::get<CaseDist>(d).arms)
        if (std::get<bool>(eval(arm.guard, env))) return draw(arm.dist, name, env, rng);
      throw ModelError("no case arm of '" + name + "' matches the drawn context");
    }
  }
}

}  // namespace

Context sample_context(const CausalModel& model, Rng& rng) {
  const std::size_t E = model.exogenous().size();
  const auto& endo = model.endogenous();
  std::vector<Value> env(E + endo.size(), Value{false});
  std::vector<bool> done(endo.size(), false);
  for (std::size_t i = 0; i < E; ++i) {
    for (std::size_t j : model.guard_prerequisites(i)) {
      if (done[j]) continue;
      env[E + j] = eval(endo[j].equation, env);
      done[j] = true;
    }
    env[i] = draw(model.exogenous()[i].dist, model.exogenous()[i].name, env, rng);
  }
  env.resize(E);
  Context ctx;
  ctx.values = std::move(env);
  return ctx;
}

Context sample_context(const CausalModel& model, const Rng& master, std::uint64_t index) {
  Rng rng = master.split(index);
  Context ctx = sample_context(model, rng);
  ctx.id = index;
  ctx.master_seed = master.key();
  ctx.draw_index = index;
  return ctx;
}

Context make_context(const CausalModel& model, const std::vector<std::pair<std::string, Value>>& values,
                     std::uint64_t id) {
  Context ctx;
  ctx.id = id;
  ctx.draw_index = id;
  ctx.values.assign(model.exogenous().size(), Value{false});
  std::vector<bool> set(model.exogenous().size(), false);
  for (const auto& [name, v] : values) {
    auto i = model.exo_index(name);
    if (!i) throw UsageError("'" + name + "' is not an exogenous variable of " + model.name());
    if (set[*i]) throw UsageError("'" + name + "' given twice");
    Value val = v;
    // Allow integer literals for real-valued variables.
    if (model.exo_type(*i) == ValueType::Real && val.index() == 1)
      val = static_cast<double>(std::get<std::int64_t>(val));
    ctx.values[*i] = std::move(val);
    set[*i] = true;
  }
  for (std::size_t i = 0; i < set.size(); ++i)
    if (!set[i]) throw UsageError("missing value for '" + model.exogenous()[i].name + "'");
  check_context(model, ctx);
  return ctx;
}

void check_context(const CausalModel& model, const Context& ctx) {
  if (ctx.values.size() != model.exogenous().size())
    throw UsageError("context has " + std::to_string(ctx.values.size()) + " values, model " + model.name() +
                     " declares " + std::to_string(model.exogenous().size()));
  for (std::size_t i = 0; i < ctx.values.size(); ++i)
    if (type_of(ctx.values[i]) != model.exo_type(i))
      throw UsageError("value of '" + model.exogenous()[i].name + "' has type " +
                       std::string(type_name(type_of(ctx.values[i]))) + ", expected " +
                       std::string(type_name(model.exo_type(i))));
}

namespace {

Assignment run(const CausalModel& model, const Context& ctx, const std::vector<std::optional<bool>>& forced) {
  const std::size_t E = model.exogenous().size();
  const auto& endo = model.endogenous();
  std::vector<Value> env;
  env.reserve(E + endo.size());
  env.insert(env.end(), ctx.values.begin(), ctx.values.end());
  for (std::size_t j = 0; j < endo.size(); ++j) {
    if (!forced.empty() && forced[j])
      env.push_back(*forced[j]);
    else
      env.push_back(eval(endo[j].equation, env));
  }
  Assignment a;
  a.values.assign(std::make_move_iterator(env.begin() + static_cast<std::ptrdiff_t>(E)),
                  std::make_move_iterator(env.end()));
  return a;
}

}  // namespace

Assignment evaluate(const CausalModel& model, const Context& ctx) {
  if (ctx.values.size() != model.exogenous().size()) check_context(model, ctx);
  return run(model, ctx, {});
}

Assignment evaluate_under(const CausalModel& model, const Context& ctx,
                          std::span<const Intervention> interventions) {
  if (ctx.values.size() != model.exogenous().size()) check_context(model, ctx);
  std::vector<std::optional<bool>> forced(model.endogenous().size());
  for (const auto& iv : interventions) {
    auto j = model.endo_index(iv.target);
    if (!j) throw UsageError("cannot intervene on '" + iv.target + "': not an endogenous variable");
    if (model.endogenous()[*j].type != VarType::Bool)
      throw UsageError("cannot intervene on '" + iv.target + "': not boolean");
    if (forced[*j]) throw UsageError("duplicate intervention on '" + iv.target + "'");
    forced[*j] = iv.forced;
  }
  return run(model, ctx, forced);
}

bool truth_of(const CausalModel& model, const Assignment& a, std::string_view name) {
  auto j = model.endo_index(name);
  if (!j) throw UsageError("'" + std::string(name) + "' is not an endogenous variable");
  if (model.endogenous()[*j].type != VarType::Bool)
    throw UsageError("'" + std::string(name) + "' is not boolean");
  return a.truth(*j);
}

UnitOutcome potential_outcomes(const CausalModel& model, const Context& ctx, const Edge& edge) {
  if (!model.has_edge(edge)) throw UsageError("edge " + to_string(edge) + " is not declared in " + model.name());
  const Assignment factual = evaluate(model, ctx);
  UnitOutcome u;
  u.context_id = ctx.id;
  u.cause = edge.cause;
  u.effect = edge.effect;
  u.x = truth_of(model, factual, edge.cause);
  u.y = truth_of(model, factual, edge.effect);
  const Intervention flip{edge.cause, !u.x};
  u.y_cf = truth_of(model, evaluate_under(model, ctx, std::span(&flip, 1)), edge.effect);
  return u;
}

}  // namespace causalqa
