#include "causalqa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>

namespace causalqa {

namespace {

std::string available_list(const World& world) {
  std::string s;
  for (auto m : availability(world)) {
    if (!s.empty()) s += ", ";
    s += mode_name(m);
  }
  return s.empty() ? "none" : s;
}

}  // namespace

ExperimentPlan plan(const World& world, GeneralizationMode mode, const PlanOverrides& ov) {
  const PlanDecl* decl = nullptr;
  bool mode_seen = false;
  for (const auto& p : world.plans) {
    if (p.mode != mode) continue;
    mode_seen = true;
    if (!ov.test || p.test == *ov.test) {
      decl = &p;
      break;
    }
  }
  if (!mode_seen)
    throw UsageError("mode '" + std::string(mode_name(mode)) + "' is not available for world '" + world.name() +
                     "' (available: " + available_list(world) + ")");
  if (!decl)
    throw UsageError("world '" + world.name() + "' has no " + std::string(mode_name(mode)) + " plan testing " +
                     to_string(*ov.test));

  ExperimentPlan out;
  out.world = world.name();
  out.mode = mode;
  out.test_edge = decl->test;
  out.train_edges = decl->train;
  if (decl->contexts) out.contexts_per_edge = static_cast<std::size_t>(*decl->contexts);
  if (out.train_edges.empty()) {
    auto derived = default_train_edges(mode, decl->test, world.model.edges());
    if (!derived) throw UsageError("plan for " + to_string(decl->test) + " has no derivable train edges");
    out.train_edges = *derived;
  }
  if (ov.train) {
    for (const auto& e : *ov.train)
      if (!world.model.has_edge(e)) throw UsageError("train edge " + to_string(e) + " is not declared");
    const bool has_test = std::find(ov.train->begin(), ov.train->end(), out.test_edge) != ov.train->end();
    if (mode == GeneralizationMode::InDomain && (ov.train->size() != 1 || !has_test))
      throw UsageError("in-domain plans train exactly on the test edge");
    if (mode != GeneralizationMode::InDomain && has_test)
      throw UsageError("a " + std::string(mode_name(mode)) + " plan must not train on its test edge");
    out.train_edges = *ov.train;
  }
  if (ov.contexts_per_edge) {
    if (*ov.contexts_per_edge < 1) throw UsageError("contexts per edge must be positive");
    out.contexts_per_edge = *ov.contexts_per_edge;
  }
  return out;
}

void EvalConfig::check() const {
  if (n_contexts < 1 || m_samples < 1 || repeats < 1) throw UsageError("evaluation counts must be positive");
  if (parallelism < 1) throw UsageError("parallelism must be at least 1");
  if (extractor != "rule" && extractor != "remote") throw UsageError("extractor must be 'rule' or 'remote'");
}

MetricsReport evaluate(const World& world, const ExperimentPlan& plan, const Answerer& answerer,
                       const EvalConfig& cfg, const Extractor& h) {
  cfg.check();
  const Edge& edge = plan.test_edge;
  if (!world.model.has_edge(edge)) throw UsageError("edge " + to_string(edge) + " is not declared in " + world.name());
  RunMeta meta{world.name(), std::string(mode_name(plan.mode)), to_string(edge),
               cfg.method.empty() ? answerer.name() : cfg.method, {cfg.seed}};
  const std::size_t n = cfg.n_contexts, M = cfg.m_samples;
  const Sampling sampling{cfg.temperature, cfg.max_tokens};

  std::vector<SampleReport> samples;
  std::size_t undecidable = 0, failed = 0;
  std::vector<std::size_t> flagged;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const Rng base = Rng(cfg.seed).split("repeat").split(r);
    const Rng contexts = base.split("contexts");
    const Rng answers = base.split("answers");

    std::vector<UnitOutcome> outcomes;
    std::vector<std::pair<RenderedQuestion, RenderedQuestion>> questions;
    std::vector<Dialogue> dialogues;
    std::vector<Rng> streams;
    outcomes.reserve(n);
    dialogues.reserve(2 * n * M);
    streams.reserve(2 * n * M);
    for (std::size_t i = 0; i < n; ++i) {
      const Context ctx = sample_context(world.model, contexts, i);
      outcomes.push_back(potential_outcomes(world.model, ctx, edge));
      questions.push_back(render_unit(world, ctx, edge));
      for (std::size_t m = 0; m < M; ++m) {
        const Rng s = answers.split(i).split(m);
        dialogues.push_back(Dialogue::ask(questions.back().first));
        dialogues.push_back(Dialogue::ask(questions.back().second));
        streams.push_back(s);
        streams.push_back(s);
      }
    }
    const auto replies = answer_batch(answerer, dialogues, sampling, cfg.parallelism, streams);

    std::size_t rep_undecidable = 0;
    auto estimate = [&](std::size_t at, const RenderedQuestion& q) -> std::optional<bool> {
      if (!replies[at].ok()) {
        ++failed;
        ++rep_undecidable;
        return std::nullopt;
      }
      auto v = h(q, *replies[at].text);
      if (!v) ++rep_undecidable;
      return v;
    };
    std::vector<std::vector<UnitEval>> by_sample(M);
    for (auto& v : by_sample) v.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < M; ++m) {
        const std::size_t at = 2 * (i * M + m);
        UnitEval e{outcomes[i], estimate(at, questions[i].first), estimate(at + 1, questions[i].second), m};
        by_sample[m].push_back(std::move(e));
      }
    undecidable += rep_undecidable;
    if (rep_undecidable * 10 > 2 * n * M) flagged.push_back(r);
    for (const auto& units : by_sample) samples.push_back({meta, sample_metrics(units)});
  }
  MetricsReport report = aggregate(samples);
  report.undecidable = undecidable;
  report.failed = failed;
  report.flagged_repeats = std::move(flagged);
  return report;
}

std::string_view tuple_order_name(TupleOrder o) noexcept {
  return o == TupleOrder::YxFirst ? "yx-first" : "ynx-first";
}

std::optional<TupleOrder> parse_tuple_order(std::string_view s) noexcept {
  if (s == "yx-first") return TupleOrder::YxFirst;
  if (s == "ynx-first") return TupleOrder::YnxFirst;
  return std::nullopt;
}

std::string illustrative_world_source(TupleOrder order) {
  // Outcome pairs listed per unit type, the same for units 1-3 (X) and 4-6.
  const char* first = "unit == 3 or unit == 6";
  const char* second = "unit == 2 or unit == 3 or unit == 5 or unit == 6";
  const bool yx_first = order == TupleOrder::YxFirst;
  std::string s;
  s += "# Six equiprobable unit types; X holds for units 1-3.\n";
  s += "world six-tuple-" + std::string(tuple_order_name(order)) + "\n\n";
  s += "exo unit ~ uniform_int(1, 6)\n\n";
  s += "var X = unit <= 3\n";
  s += std::string("var Y_x = ") + (yx_first ? first : second) + "\n";
  s += std::string("var Y_not_x = ") + (yx_first ? second : first) + "\n";
  s += "var Y = (X and Y_x) or (not X and Y_not_x)\n\n";
  s += "edge X -> Y\n\n";
  s += "context \"This is unit {unit}.\"\n\n";
  s += "ask Y \"Does the effect occur?\"\n"
       "  cf \"does the effect occur?\"\n"
       "  yes \"the effect occurs\"\n"
       "  no \"the effect does not occur\"\n"
       "  cf_yes \"the effect would occur\"\n"
       "  cf_no \"the effect would not occur\"\n\n";
  s += "ask_if X=true about * \"Suppose the cause were present. Then {cf_question}\"\n";
  s += "ask_if X=false about * \"Suppose the cause were absent. Then {cf_question}\"\n\n";
  s += "plan in-domain test X -> Y\n";
  return s;
}

World illustrative_world(TupleOrder order) {
  return load_world(illustrative_world_source(order), "six-tuple-" + std::string(tuple_order_name(order)));
}

NoiseSpec sweep_noise(AnswererKind kind, double eps, double lambda) {
  return {kind, kind == AnswererKind::FactuallyCorrect ? 2 * eps : eps, lambda};
}

std::array<double, kMetricCount> expected_metrics(TupleOrder order, const NoiseSpec& noise) {
  static const World worlds[2] = {illustrative_world(TupleOrder::YxFirst), illustrative_world(TupleOrder::YnxFirst)};
  const World& world = worlds[order == TupleOrder::YxFirst ? 0 : 1];
  const Edge edge{"X", "Y"};
  double f = 0, cf = 0;
  std::array<double, 4> ir{};
  double pn_num = 0, pn_den = 0, ps_num = 0, ps_den = 0;        // estimates
  double tpn_num = 0, tpn_den = 0, tps_num = 0, tps_den = 0;    // truth
  for (std::int64_t k = 1; k <= 6; ++k) {
    const Context ctx = make_context(world.model, {{"unit", Value(k)}}, static_cast<std::uint64_t>(k));
    const UnitOutcome o = potential_outcomes(world.model, ctx, edge);
    const double w = 1.0 / 6;
    const double r = noisy_rate(noise, o.x);
    std::vector<std::pair<FlipSchedule, double>> flips;
    switch (noise.kind) {
      case AnswererKind::FactuallyCorrect: flips = {{{false, false}, 1 - r}, {{false, true}, r}}; break;
      case AnswererKind::UniformlyCorrect:
        flips = {{{false, false}, (1 - r) * (1 - r)}, {{false, true}, (1 - r) * r},
                 {{true, false}, r * (1 - r)},        {{true, true}, r * r}};
        break;
      case AnswererKind::CausallyConsistent: flips = {{{false, false}, 1 - r}, {{true, true}, r}}; break;
      default: flips = {{{false, false}, 1.0}}; break;
    }
    if (o.x && o.y) tpn_den += w, tpn_num += w * !o.y_cf;
    if (!o.x && !o.y) tps_den += w, tps_num += w * o.y_cf;
    for (const auto& [fl, p] : flips) {
      const double wp = w * p;
      const bool yh = o.y != fl.factual, ych = o.y_cf != fl.counterfactual;
      f += wp * fl.factual;
      cf += wp * fl.counterfactual;
      for (std::size_t i = 0; i < 4; ++i)
        ir[i] += wp * (classify(kRelations[i], o.x, yh, ych) != classify(kRelations[i], o.x, o.y, o.y_cf));
      if (o.x && yh) pn_den += wp, pn_num += wp * !ych;
      if (!o.x && !yh) ps_den += wp, ps_num += wp * ych;
    }
  }
  const double nan = std::nan("");
  auto ratio = [&](double a, double b) { return b > 0 ? a / b : nan; };
  return {f,     cf,    (f + cf) / 2, ir[0], ir[1], ir[2], ir[3], (ir[0] + ir[1] + ir[2] + ir[3]) / 4,
          ratio(pn_num, pn_den), ratio(ps_num, ps_den), ratio(tpn_num, tpn_den), ratio(tps_num, tps_den)};
}

std::vector<SweepRow> sweep_fig3(std::span<const double> eps_levels, std::span<const double> lambda_grid,
                                 TupleOrder order) {
  if (eps_levels.empty() || lambda_grid.empty()) throw UsageError("sweep grids must be nonempty");
  std::vector<SweepRow> rows;
  for (AnswererKind kind :
       {AnswererKind::FactuallyCorrect, AnswererKind::UniformlyCorrect, AnswererKind::CausallyConsistent})
    for (double eps : eps_levels)
      for (double lambda : lambda_grid) {
        if (!(eps >= 0 && eps <= 0.5) || !(lambda >= 0 && lambda <= 1))
          throw UsageError("sweep needs eps in [0, 0.5] and lambda in [0, 1]");
        rows.push_back({kind, eps, lambda, expected_metrics(order, sweep_noise(kind, eps, lambda))});
      }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows, TupleOrder order) {
  std::string out = "kind,order,eps,lambda";
  for (Metric m : kMetrics) out += "," + std::string(metric_name(m));
  out += "\n";
  for (const auto& r : rows) {
    out += std::string(answerer_kind_name(r.kind)) + "," + std::string(tuple_order_name(order)) + "," +
           format_number(r.eps) + "," + format_number(r.lambda);
    for (double v : r.values) out += "," + (std::isnan(v) ? std::string() : format_number(v));
    out += "\n";
  }
  return out;
}

std::string normalized_csv(std::span<const NormalizedScore> scores) {
  std::string out = "mode,method,avg_er,avg_ir,worlds\n";
  for (const auto& s : scores)
    out += s.mode + "," + s.method + "," + format_number(s.avg_er) + "," + format_number(s.avg_ir) + "," +
           std::to_string(s.worlds) + "\n";
  return out;
}

std::string normalized_table(std::span<const NormalizedScore> scores) {
  std::size_t wm = 4, wn = 6;
  for (const auto& s : scores) wm = std::max(wm, s.mode.size()), wn = std::max(wn, s.method.size());
  auto pad = [](std::string s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto fixed2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8.2f", v);
    return std::string(buf);
  };
  std::string out = pad("mode", wm) + "  " + pad("method", wn) + "    Avg-ER    Avg-IR\n";
  for (const auto& s : scores)
    out += pad(s.mode, wm) + "  " + pad(s.method, wn) + "  " + fixed2(s.avg_er) + "  " + fixed2(s.avg_ir) + "\n";
  return out;
}

std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept {
  if (s == "sft") return Algorithm::Sft;
  if (s == "dpo") return Algorithm::Dpo;
  if (s == "ccf") return Algorithm::Ccf;
  return std::nullopt;
}

DatasetFormat dataset_format(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Sft: return DatasetFormat::Sft;
    case Algorithm::Dpo: return DatasetFormat::Dpo;
    case Algorithm::Ccf: return DatasetFormat::DpoDialogue;
  }
  return DatasetFormat::Sft;
}

namespace {
template <class T>
void append(GenOutput& out, GenResult<T>&& part, const Edge& e) {
  auto& dst = std::get<std::vector<T>>(out.data);
  std::move(part.records.begin(), part.records.end(), std::back_inserter(dst));
  for (auto& w : part.warnings) out.warnings.push_back(to_string(e) + ": " + w);
}
}  // namespace

GenOutput generate(const World& world, std::span<const Edge> edges, Algorithm alg, const GenConfig& cfg,
                   const Answerer* model, const Generator& gen, const Extractor& h) {
  if (alg != Algorithm::Sft && !model) throw UsageError("preference datasets need an answerer");
  GenOutput out;
  switch (alg) {
    case Algorithm::Sft: out.data = std::vector<SupervisedExample>{}; break;
    case Algorithm::Dpo: out.data = std::vector<PreferenceRecord>{}; break;
    case Algorithm::Ccf: out.data = std::vector<DialoguePreference>{}; break;
  }
  for (const auto& e : edges) {
    switch (alg) {
      case Algorithm::Sft: append(out, gen_supervised(world, e, cfg, gen), e); break;
      case Algorithm::Dpo: append(out, gen_preference_cf(world, e, cfg, *model, h), e); break;
      case Algorithm::Ccf: append(out, gen_preference_ccf(world, e, cfg, *model, h), e); break;
    }
  }
  return out;
}

}  // namespace causalqa
