#include "causalqa/datagen.hpp"

#include <array>

#include "causalqa/metrics.hpp"

namespace causalqa {

namespace {

constexpr std::array<std::string_view, 4> kVariantNames{"only-f", "only-cf", "f-and-cf", "only-fx2"};

struct Unit {
  Context ctx;
  UnitOutcome outcome;
  RenderedQuestion factual;
  RenderedQuestion counterfactual;
};

Unit draw_unit(const World& world, const Edge& edge, const Rng& master, std::uint64_t index) {
  Unit u{sample_context(world.model, master, index), {}, {}, {}};
  u.outcome = potential_outcomes(world.model, u.ctx, edge);
  std::tie(u.factual, u.counterfactual) = render_unit(world, u.ctx, edge);
  return u;
}

RecordMeta base_meta(const World& world, const Edge& edge, const GenConfig& cfg, const UnitOutcome& o,
                     std::string_view kind) {
  RecordMeta m;
  m.world = world.name();
  m.edge = to_string(edge);
  m.mode = cfg.mode;
  m.context_id = o.context_id;
  m.kind = std::string(kind);
  m.seed = cfg.seed;
  m.x = o.x;
  m.y = o.y;
  m.y_cf = o.y_cf;
  return m;
}

Sampling sampling_of(const GenConfig& cfg) { return {cfg.temperature, cfg.max_tokens}; }

std::vector<Unit> draw_units(const World& world, const Edge& edge, const GenConfig& cfg, std::size_t n) {
  if (!world.model.has_edge(edge)) throw UsageError("edge " + to_string(edge) + " is not declared in " + world.name());
  const Rng master(cfg.seed);
  std::vector<Unit> units;
  units.reserve(n);
  for (std::size_t i = 0; i < n; ++i) units.push_back(draw_unit(world, edge, master, i));
  return units;
}

// Stream shared by the factual and counterfactual answer of sample m.
Rng answer_stream(const GenConfig& cfg, std::uint64_t context_id, std::size_t m) {
  return Rng(cfg.seed).split("answers").split(context_id).split(m);
}

}  // namespace

std::string_view variant_name(DatasetVariant v) noexcept { return kVariantNames[static_cast<std::size_t>(v)]; }

std::optional<DatasetVariant> parse_variant(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i)
    if (kVariantNames[i] == s) return static_cast<DatasetVariant>(i);
  return std::nullopt;
}

void GenConfig::check(bool preference) const {
  if (n_contexts < 1) throw UsageError("n_contexts must be at least 1");
  if (preference && m_samples < 2) throw UsageError("preference datasets need m_samples >= 2");
  if (parallelism < 1) throw UsageError("parallelism must be at least 1");
  if (!(temperature >= 0)) throw UsageError("temperature must be non-negative");
}

std::size_t GenConfig::contexts_drawn() const noexcept {
  return variant == DatasetVariant::FAndCF ? n_contexts : 2 * n_contexts;
}
bool GenConfig::wants_factual() const noexcept { return variant != DatasetVariant::OnlyCF; }
bool GenConfig::wants_counterfactual() const noexcept {
  return variant == DatasetVariant::OnlyCF || variant == DatasetVariant::FAndCF;
}

std::string Generator::operator()(const RenderedQuestion& q, bool truth) const {
  if (!remote) return generate_answer(q, truth);
  return generate_answer_remote(q, truth, *remote, attempts);
}

std::optional<bool> Extractor::operator()(const RenderedQuestion& q, std::string_view answer) const {
  if (!remote) {
    auto a = extract_rule(answer);
    return a ? std::optional<bool>(a->value) : std::nullopt;
  }
  try {
    return extract_remote(answer, q.text, *remote).value;
  } catch (const ExtractionError&) {
    return std::nullopt;
  } catch (const TransportError&) {
    return std::nullopt;
  }
}

GenResult<SupervisedExample> gen_supervised(const World& world, const Edge& edge, const GenConfig& cfg,
                                            const Generator& h) {
  cfg.check(false);
  GenResult<SupervisedExample> out;
  for (const auto& u : draw_units(world, edge, cfg, cfg.contexts_drawn())) {
    auto emit = [&](const RenderedQuestion& q, bool truth) {
      const auto kind = kind_name(q.kind);
      try {
        SupervisedExample ex{q.text, h(q, truth), base_meta(world, edge, cfg, u.outcome, kind)};
        ex.meta.truth = truth;
        out.records.push_back(std::move(ex));
      } catch (const std::exception& e) {
        out.warnings.push_back("context " + std::to_string(u.outcome.context_id) + " " + std::string(kind) +
                               ": skipped: " + e.what());
      }
    };
    if (cfg.wants_factual()) emit(u.factual, u.outcome.y);
    if (cfg.wants_counterfactual()) emit(u.counterfactual, u.outcome.y_cf);
  }
  return out;
}

GenResult<PreferenceRecord> gen_preference_cf(const World& world, const Edge& edge, const GenConfig& cfg,
                                              const Answerer& model, const Extractor& h) {
  cfg.check(true);
  const auto units = draw_units(world, edge, cfg, cfg.contexts_drawn());
  const std::size_t M = cfg.m_samples;
  std::vector<QuestionKind> kinds;
  if (cfg.wants_factual()) kinds.push_back(QuestionKind::Factual);
  if (cfg.wants_counterfactual()) kinds.push_back(QuestionKind::Interventional);

  std::vector<Dialogue> dialogues;
  std::vector<Rng> streams;
  for (const auto& u : units)
    for (QuestionKind k : kinds)
      for (std::size_t m = 0; m < M; ++m) {
        dialogues.push_back(Dialogue::ask(k == QuestionKind::Factual ? u.factual : u.counterfactual));
        streams.push_back(answer_stream(cfg, u.outcome.context_id, m));
      }
  const auto answers = answer_batch(model, dialogues, sampling_of(cfg), cfg.parallelism, streams);

  GenResult<PreferenceRecord> out;
  std::size_t at = 0;
  for (const auto& u : units)
    for (QuestionKind k : kinds) {
      const RenderedQuestion& q = k == QuestionKind::Factual ? u.factual : u.counterfactual;
      const bool truth = k == QuestionKind::Factual ? u.outcome.y : u.outcome.y_cf;
      std::vector<std::optional<bool>> est(M);
      std::vector<bool> ok(M);
      for (std::size_t m = 0; m < M; ++m, ++at) {
        ok[m] = answers[at].ok();
        if (ok[m]) est[m] = h(q, *answers[at].text);
        else
          out.warnings.push_back("context " + std::to_string(u.outcome.context_id) + " " +
                                 std::string(kind_name(k)) + " sample " + std::to_string(m) + ": " + answers[at].error);
      }
      const std::size_t base = at - M;
      for (std::size_t m = 0; m < M; ++m) {
        if (!ok[m] || est[m] != truth) continue;
        for (std::size_t mp = 0; mp < M; ++mp) {
          if (!ok[mp] || est[mp] == truth) continue;
          PreferenceRecord r{q.text, *answers[base + m].text, *answers[base + mp].text,
                             base_meta(world, edge, cfg, u.outcome, kind_name(k))};
          r.meta.m = m;
          r.meta.m_prime = mp;
          r.meta.truth = truth;
          out.records.push_back(std::move(r));
        }
      }
    }
  return out;
}

GenResult<DialoguePreference> gen_preference_ccf(const World& world, const Edge& edge, const GenConfig& cfg,
                                                 const Answerer& model, const Extractor& h) {
  cfg.check(true);
  if (cfg.variant != DatasetVariant::FAndCF)
    throw UsageError("causal consistency feedback needs both question kinds (variant f-and-cf)");
  const std::size_t n = cfg.n_contexts;
  const auto units = draw_units(world, edge, cfg, n);
  const std::size_t M = cfg.m_samples;
  const Sampling sampling = sampling_of(cfg);

  std::vector<Dialogue> first;
  std::vector<Rng> streams;
  for (const auto& u : units)
    for (std::size_t m = 0; m < M; ++m) {
      first.push_back(Dialogue::ask(u.factual));
      streams.push_back(answer_stream(cfg, u.outcome.context_id, m));
    }
  const auto fa = answer_batch(model, first, sampling, cfg.parallelism, streams);

  std::vector<Dialogue> second;
  std::vector<Rng> second_streams;
  std::vector<std::size_t> second_of(first.size(), SIZE_MAX);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (!fa[i].ok()) continue;
    const auto& u = units[i / M];
    second_of[i] = second.size();
    second.push_back(first[i].then(*fa[i].text, u.counterfactual));
    second_streams.push_back(streams[i]);
  }
  const auto ca = answer_batch(model, second, sampling, cfg.parallelism, second_streams);

  GenResult<DialoguePreference> out;
  for (std::size_t c = 0; c < units.size(); ++c) {
    const auto& u = units[c];
    const auto& o = u.outcome;
    std::vector<std::optional<int>> reward(M);
    for (std::size_t m = 0; m < M; ++m) {
      const std::size_t i = c * M + m;
      const std::string where = "context " + std::to_string(o.context_id) + " sample " + std::to_string(m) + ": ";
      if (!fa[i].ok()) {
        out.warnings.push_back(where + fa[i].error);
        continue;
      }
      const auto& second_answer = ca[second_of[i]];
      if (!second_answer.ok()) {
        out.warnings.push_back(where + second_answer.error);
        continue;
      }
      UnitEval e{o, h(u.factual, *fa[i].text), h(u.counterfactual, *second_answer.text), m};
      reward[m] = ccf_reward(o.x, o.y, o.y_cf, scored_y_hat(e), scored_y_cf_hat(e));
    }
    auto continuation = [&](std::size_t m) {
      const auto& d = second[second_of[c * M + m]];
      std::vector<ChatMessage> msgs{{Role::Assistant, d.turns[1].text}, {Role::User, d.turns[2].text}};
      msgs.push_back({Role::Assistant, *ca[second_of[c * M + m]].text});
      return msgs;
    };
    for (std::size_t m = 0; m < M; ++m) {
      if (!reward[m]) continue;
      for (std::size_t mp = 0; mp < M; ++mp) {
        if (!reward[mp] || *reward[m] <= *reward[mp]) continue;
        DialoguePreference r{{{Role::User, u.factual.text}}, continuation(m), continuation(mp),
                             base_meta(world, edge, cfg, o, "dialogue")};
        r.meta.m = m;
        r.meta.m_prime = mp;
        r.meta.reward_chosen = *reward[m];
        r.meta.reward_rejected = *reward[mp];
        out.records.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace causalqa
