#include <gtest/gtest.h>

#include <map>

#include "causalqa/datagen.hpp"
#include "causalqa/metrics.hpp"
#include "causalqa/worlds.hpp"
#include "support.hpp"

using namespace causalqa;

namespace {

std::optional<bool> ext(std::string_view s) {
  auto a = extract_rule(s);
  return a ? std::optional<bool>(a->value) : std::nullopt;
}

const World& candy() {
  static const World w = load_builtin(BuiltinWorldId::CandyBipartite);
  return w;
}

const Edge kAD{"A", "D"};

GenConfig small(DatasetVariant v, std::size_t n = 8, std::size_t m = 4) {
  GenConfig c;
  c.n_contexts = n;
  c.m_samples = m;
  c.variant = v;
  c.seed = 11;
  return c;
}

// Every generator call fails, so every item is skipped with a warning.
class DeadClient : public ChatClient {
 public:
  std::string complete(const std::vector<ChatMessage>&, const Sampling&) override {
    throw TransportError("offline");
  }
};

}  // namespace

TEST(GenConfig, ContextCountsPerVariant) {
  EXPECT_EQ(small(DatasetVariant::FAndCF, 5).contexts_drawn(), 5u);
  EXPECT_EQ(small(DatasetVariant::OnlyF, 5).contexts_drawn(), 10u);
  EXPECT_EQ(small(DatasetVariant::OnlyCF, 5).contexts_drawn(), 10u);
  EXPECT_EQ(small(DatasetVariant::OnlyFx2, 5).contexts_drawn(), 10u);
  EXPECT_THROW(small(DatasetVariant::FAndCF, 0).check(false), UsageError);
  EXPECT_THROW(small(DatasetVariant::FAndCF, 3, 1).check(true), UsageError);
  EXPECT_NO_THROW(small(DatasetVariant::FAndCF, 3, 1).check(false));
  for (auto v : {DatasetVariant::OnlyF, DatasetVariant::OnlyCF, DatasetVariant::FAndCF, DatasetVariant::OnlyFx2})
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_FALSE(parse_variant("both"));
}

TEST(Supervised, RecordsMatchGroundTruth) {
  for (auto v : {DatasetVariant::OnlyF, DatasetVariant::OnlyCF, DatasetVariant::FAndCF}) {
    const auto cfg = small(v);
    const auto out = gen_supervised(candy(), kAD, cfg);
    EXPECT_TRUE(out.warnings.empty());
    EXPECT_EQ(out.records.size(), 2 * cfg.n_contexts) << variant_name(v);
    for (const auto& r : out.records) {
      const Context ctx = sample_context(candy().model, Rng(cfg.seed), r.meta.context_id);
      const auto u = potential_outcomes(candy().model, ctx, kAD);
      EXPECT_EQ(r.meta.x, u.x);
      EXPECT_EQ(r.meta.y, u.y);
      EXPECT_EQ(r.meta.y_cf, u.y_cf);
      const bool truth = r.meta.kind == "factual" ? u.y : u.y_cf;
      EXPECT_EQ(r.meta.truth, truth);
      EXPECT_EQ(ext(r.completion), truth) << r.completion;
      if (v == DatasetVariant::OnlyF) EXPECT_EQ(r.meta.kind, "factual");
      if (v == DatasetVariant::OnlyCF) EXPECT_EQ(r.meta.kind, "counterfactual");
    }
  }
}

TEST(Supervised, GeneratorFailuresAreSkippedWithWarnings) {
  DeadClient dead;
  const auto out = gen_supervised(candy(), kAD, small(DatasetVariant::FAndCF, 3), Generator{&dead, 2});
  EXPECT_TRUE(out.records.empty());
  ASSERT_EQ(out.warnings.size(), 6u);
  EXPECT_NE(out.warnings[0].find("offline"), std::string::npos);
}

TEST(Supervised, UndeclaredEdgeIsAnError) {
  EXPECT_THROW(gen_supervised(candy(), Edge{"C", "D"}, small(DatasetVariant::FAndCF)), UsageError);
}

TEST(PreferenceCf, OracleYieldsNothing) {
  const OracleAnswerer o;
  EXPECT_TRUE(gen_preference_cf(candy(), kAD, small(DatasetVariant::FAndCF), o).records.empty());
  EXPECT_TRUE(gen_preference_ccf(candy(), kAD, small(DatasetVariant::FAndCF), o).records.empty());
}

TEST(PreferenceCf, RecordsAreSoundAndComplete) {
  const NoisyAnswerer a({AnswererKind::UniformlyCorrect, 0.3, 0.5});
  const auto cfg = small(DatasetVariant::FAndCF, 10, 5);
  const auto out = gen_preference_cf(candy(), kAD, cfg, a);
  ASSERT_FALSE(out.records.empty());
  std::map<std::pair<std::uint64_t, std::string>, std::size_t> per_question;
  for (const auto& r : out.records) {
    EXPECT_EQ(ext(r.chosen), r.meta.truth);
    EXPECT_NE(ext(r.rejected), r.meta.truth);
    EXPECT_NE(*r.meta.m, *r.meta.m_prime);
    ++per_question[{r.meta.context_id, r.meta.kind}];
  }
  // Independent recount: re-answer each question and count right x wrong pairs.
  std::size_t expected = 0;
  for (std::uint64_t i = 0; i < cfg.n_contexts; ++i) {
    const auto [f, cf] = render_unit(candy(), sample_context(candy().model, Rng(cfg.seed), i), kAD);
    for (const auto* q : {&f, &cf}) {
      std::size_t right = 0, wrong = 0;
      for (std::size_t m = 0; m < cfg.m_samples; ++m) {
        const Rng s = Rng(cfg.seed).split("answers").split(i).split(m);
        (ext(a.answer(Dialogue::ask(*q), {}, s)) == q->provenance->truth ? right : wrong)++;
      }
      expected += right * wrong;
      const std::string kind(kind_name(q->kind));
      const auto it = per_question.find({i, kind});
      EXPECT_EQ(it == per_question.end() ? 0 : it->second, right * wrong);
    }
  }
  EXPECT_EQ(out.records.size(), expected);
}

TEST(PreferenceCcf, ChosenHasStrictlyHigherReward) {
  const NoisyAnswerer a({AnswererKind::UniformlyCorrect, 0.3, 0.5});
  const auto cfg = small(DatasetVariant::FAndCF, 12, 5);
  const auto out = gen_preference_ccf(candy(), kAD, cfg, a);
  ASSERT_FALSE(out.records.empty());
  for (const auto& r : out.records) {
    ASSERT_EQ(r.prefix.size(), 1u);
    ASSERT_EQ(r.chosen.size(), 3u);
    ASSERT_EQ(r.rejected.size(), 3u);
    EXPECT_EQ(r.chosen[1], r.rejected[1]);
    auto reward = [&](const std::vector<ChatMessage>& c) {
      const bool yh = ext(c[0].content).value_or(!r.meta.y);
      const bool ycfh = ext(c[2].content).value_or(!r.meta.y_cf);
      return ccf_reward(r.meta.x, r.meta.y, r.meta.y_cf, yh, ycfh);
    };
    EXPECT_EQ(reward(r.chosen), r.meta.reward_chosen);
    EXPECT_EQ(reward(r.rejected), r.meta.reward_rejected);
    EXPECT_GT(*r.meta.reward_chosen, *r.meta.reward_rejected);
    EXPECT_EQ(r.meta.kind, "dialogue");
  }
  EXPECT_THROW(gen_preference_ccf(candy(), kAD, small(DatasetVariant::OnlyF), a), UsageError);
}

TEST(Preference, ParallelismDoesNotChangeOutput) {
  const NoisyAnswerer a({AnswererKind::CausallyConsistent, 0.25, 0.3});
  auto cfg = small(DatasetVariant::FAndCF, 10, 4);
  const std::string one = to_jsonl(gen_preference_ccf(candy(), kAD, cfg, a).records) +
                          to_jsonl(gen_preference_cf(candy(), kAD, cfg, a).records);
  cfg.parallelism = 8;
  const std::string eight = to_jsonl(gen_preference_ccf(candy(), kAD, cfg, a).records) +
                            to_jsonl(gen_preference_cf(candy(), kAD, cfg, a).records);
  EXPECT_EQ(one, eight);
}

TEST(DatasetIo, RoundTripsEveryFormat) {
  const NoisyAnswerer a({AnswererKind::UniformlyCorrect, 0.3, 0.5});
  const auto cfg = small(DatasetVariant::FAndCF, 6, 4);
  const std::vector<Dataset> sets{gen_supervised(candy(), kAD, cfg).records,
                                  gen_preference_cf(candy(), kAD, cfg, a).records,
                                  gen_preference_ccf(candy(), kAD, cfg, a).records};
  for (const auto& d : sets) {
    const std::string text = to_jsonl(d);
    const Dataset back = parse_dataset(text, format_of(d));
    EXPECT_EQ(back, d);
    EXPECT_EQ(to_jsonl(back), text);
  }
}

TEST(DatasetIo, KeyOrderIsFixed) {
  SupervisedExample ex{"p", "c", {}};
  ex.meta.world = "w";
  ex.meta.kind = "factual";
  ex.meta.truth = true;
  EXPECT_EQ(to_jsonl(std::vector<SupervisedExample>{ex}),
            "{\"prompt\":\"p\",\"completion\":\"c\",\"meta\":{\"world\":\"w\",\"edge\":\"\",\"mode\":\"\","
            "\"context_id\":0,\"kind\":\"factual\",\"seed\":0,\"x\":false,\"y\":false,\"y_cf\":false,"
            "\"truth\":true}}\n");
}

TEST(DatasetIo, StrictParsingNamesTheLine) {
  const std::string good =
      R"({"prompt":"p","completion":"c","meta":{"world":"w","edge":"A->B","mode":"","context_id":0,"kind":"factual","seed":0,"x":false,"y":false,"y_cf":false}})";
  EXPECT_EQ(dataset_size(parse_dataset(good + "\n", DatasetFormat::Sft)), 1u);
  auto line_of = [](const std::string& text, DatasetFormat f) -> std::size_t {
    try {
      parse_dataset(text, f);
    } catch (const DatasetError& e) {
      return e.line();
    }
    return 0;
  };
  auto with = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_EQ(line_of(good + "\n" + with("\"prompt\"", "\"promt\"") + "\n", DatasetFormat::Sft), 2u);
  EXPECT_EQ(line_of(good + "\n\n", DatasetFormat::Sft), 2u);
  EXPECT_EQ(line_of("{not json\n", DatasetFormat::Sft), 1u);
  EXPECT_EQ(line_of(with("\"x\":false", "\"x\":0") + "\n", DatasetFormat::Sft), 1u);
  EXPECT_EQ(line_of(with("\"context_id\":0", "\"context_id\":-1") + "\n", DatasetFormat::Sft), 1u);
  EXPECT_EQ(line_of(with("\"factual\"", "\"other\"") + "\n", DatasetFormat::Sft), 1u);
  EXPECT_EQ(line_of(with(",\"seed\":0", "") + "\n", DatasetFormat::Sft), 1u);
  EXPECT_EQ(line_of(good + "\n", DatasetFormat::Dpo), 1u);
  try {
    parse_dataset(with("\"prompt\"", "\"promt\""), DatasetFormat::Sft);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_EQ(std::string(e.what()), "line 1: unknown field 'promt' in record");
  }
}
