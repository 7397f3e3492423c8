#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "causalqa/answerer.hpp"
#include "causalqa/worlds.hpp"
#include "support.hpp"

using namespace causalqa;

namespace {

std::pair<RenderedQuestion, RenderedQuestion> unit_questions(std::uint64_t i = 0) {
  static const World w = load_builtin(BuiltinWorldId::CandyBipartite);
  return render_unit(w, sample_context(w.model, Rng(1), i), {"A", "D"});
}

std::optional<bool> ext(const std::string& s) {
  auto a = extract_rule(s);
  return a ? std::optional<bool>(a->value) : std::nullopt;
}

class FailingOn : public Answerer {
 public:
  explicit FailingOn(std::set<std::size_t> bad) : bad_(std::move(bad)) {}
  std::string answer(const Dialogue& d, const Sampling&, Rng) const override {
    const auto id = last_question(d).context_id;
    if (bad_.count(id)) throw TransportError("boom " + std::to_string(id));
    return "Yes " + std::to_string(id);
  }
  std::string name() const override { return "failing"; }

 private:
  std::set<std::size_t> bad_;
};

}  // namespace

TEST(Dialogue, AskThenFollowUp) {
  const auto [f, cf] = unit_questions();
  const Dialogue d = Dialogue::ask(f).then("Yes.", cf);
  d.check_answerable();
  const auto msgs = d.messages();
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(msgs[0].content, f.text);
  EXPECT_EQ(msgs[1].role, Role::Assistant);
  EXPECT_EQ(msgs[2].content, cf.body);
}

TEST(Dialogue, RejectsMalformedTurns) {
  Dialogue d;
  EXPECT_THROW(d.check_answerable(), UsageError);
  d.turns.push_back({Role::Assistant, "hi", std::nullopt});
  EXPECT_THROW(d.check_answerable(), UsageError);
  d.turns = {{Role::User, "q", std::nullopt}, {Role::Assistant, "a", std::nullopt}};
  EXPECT_THROW(d.check_answerable(), UsageError);
}

TEST(Answerer, OracleAnswersTruth) {
  OracleAnswerer o;
  for (std::uint64_t i = 0; i < 30; ++i) {
    const auto [f, cf] = unit_questions(i);
    EXPECT_EQ(ext(o.answer(Dialogue::ask(f), {}, Rng(0))), f.provenance->truth);
    EXPECT_EQ(ext(o.answer(Dialogue::ask(cf), {}, Rng(0))), cf.provenance->truth);
  }
}

TEST(Answerer, SimulatedNeedsProvenance) {
  RenderedQuestion q;
  q.text = "free text";
  EXPECT_THROW(OracleAnswerer().answer(Dialogue::ask(q), {}, Rng(0)), UsageError);
}

TEST(Answerer, NoisyRate) {
  EXPECT_DOUBLE_EQ(noisy_rate({AnswererKind::UniformlyCorrect, 0.2, 0.25}, true), 0.1);
  EXPECT_DOUBLE_EQ(noisy_rate({AnswererKind::UniformlyCorrect, 0.2, 0.25}, false), 0.3);
  EXPECT_DOUBLE_EQ(noisy_rate({AnswererKind::UniformlyCorrect, 0.8, 1.0}, true), 1.0);
}

TEST(AnswererProperty, FlipSchedulesFollowTheKind) {
  for (int t = 0; t < testsupport::kTrials; ++t) {
    auto g = testsupport::trial_rng(30, t);
    const auto u = testsupport::any_unit(g);
    const double eps = g.uniform() * 0.5, lambda = g.uniform();
    const Rng s = g.split("stream");
    const auto fc = noisy_flip_schedule({AnswererKind::FactuallyCorrect, eps, lambda}, u, s);
    EXPECT_FALSE(fc.factual);
    const auto cc = noisy_flip_schedule({AnswererKind::CausallyConsistent, eps, lambda}, u, s);
    EXPECT_EQ(cc.factual, cc.counterfactual);
    const auto zero = noisy_flip_schedule({AnswererKind::UniformlyCorrect, 0.0, lambda}, u, s);
    EXPECT_EQ(zero, (FlipSchedule{false, false}));
    EXPECT_EQ(noisy_flip_schedule({AnswererKind::UniformlyCorrect, eps, lambda}, u, s),
              noisy_flip_schedule({AnswererKind::UniformlyCorrect, eps, lambda}, u, s));
  }
}

TEST(Answerer, UniformFlipFrequencies) {
  const NoiseSpec spec{AnswererKind::UniformlyCorrect, 0.3, 0.5};
  UnitOutcome u;
  u.x = true;
  int f = 0, cf = 0, both = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto s = noisy_flip_schedule(spec, u, Rng(4).split(static_cast<std::uint64_t>(i)));
    f += s.factual;
    cf += s.counterfactual;
    both += s.factual && s.counterfactual;
  }
  const double sd = std::sqrt(n * 0.3 * 0.7);
  EXPECT_NEAR(f, 0.3 * n, 5 * sd);
  EXPECT_NEAR(cf, 0.3 * n, 5 * sd);
  EXPECT_NEAR(both, 0.09 * n, 5 * std::sqrt(n * 0.09 * 0.91));
}

TEST(Answerer, NoisyAnswerFlipsAgainstTruth) {
  const NoisyAnswerer always(NoiseSpec{AnswererKind::CausallyConsistent, 1.0, 0.5});  // rate 1 everywhere
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto [f, cf] = unit_questions(i);
    EXPECT_EQ(ext(always.answer(Dialogue::ask(f), {}, Rng(i))), !f.provenance->truth);
    EXPECT_EQ(ext(always.answer(Dialogue::ask(cf), {}, Rng(i))), !cf.provenance->truth);
  }
}

TEST(Answerer, MakeAnswererSpecs) {
  EXPECT_EQ(make_answerer("oracle")->name(), "oracle");
  auto* n = dynamic_cast<NoisyAnswerer*>(make_answerer("consistent:0.1:0.25").get());
  ASSERT_NE(n, nullptr);
  auto a = make_answerer("uniform:0.2");
  auto* u = dynamic_cast<NoisyAnswerer*>(a.get());
  ASSERT_NE(u, nullptr);
  EXPECT_EQ(u->spec().kind, AnswererKind::UniformlyCorrect);
  EXPECT_DOUBLE_EQ(u->spec().eps, 0.2);
  EXPECT_DOUBLE_EQ(u->spec().lambda, 0.5);
  EXPECT_THROW(make_answerer("uniform"), UsageError);
  EXPECT_THROW(make_answerer("uniform:2"), UsageError);
  EXPECT_THROW(make_answerer("uniform:0.1:x"), UsageError);
  EXPECT_THROW(make_answerer("bogus"), UsageError);
  EXPECT_THROW(make_answerer("remote"), UsageError);
}

TEST(AnswerBatch, PositionalErrorsDoNotStopTheBatch) {
  std::vector<Dialogue> ds;
  for (std::uint64_t i = 0; i < 10; ++i) ds.push_back(Dialogue::ask(unit_questions(i).first));
  const FailingOn a({3, 7});
  for (std::size_t par : {1u, 4u}) {
    const auto out = answer_batch(a, ds, {}, par, Rng(0));
    ASSERT_EQ(out.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
      if (i == 3 || i == 7) {
        EXPECT_FALSE(out[i].ok());
        EXPECT_NE(out[i].error.find("boom " + std::to_string(i)), std::string::npos);
      } else {
        EXPECT_EQ(*out[i].text, "Yes " + std::to_string(i));
      }
    }
  }
}

TEST(AnswerBatch, ParallelismDoesNotChangeResults) {
  std::vector<Dialogue> ds;
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto [f, cf] = unit_questions(i);
    ds.push_back(Dialogue::ask(f));
    ds.push_back(Dialogue::ask(cf));
  }
  const NoisyAnswerer a({AnswererKind::UniformlyCorrect, 0.3, 0.5});
  const auto one = answer_batch(a, ds, {}, 1, Rng(9));
  const auto eight = answer_batch(a, ds, {}, 8, Rng(9));
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(one[i].text, eight[i].text);
}

TEST(Wire, RequestBodyHasStableKeyOrder) {
  RemoteConfig cfg;
  cfg.model = "m1";
  const std::string body =
      chat_request_body(cfg, {{Role::User, "hi \"there\""}, {Role::Assistant, "yo"}}, Sampling{0.5, 16});
  EXPECT_EQ(body,
            "{\"model\":\"m1\",\"messages\":[{\"role\":\"user\",\"content\":\"hi \\\"there\\\"\"},"
            "{\"role\":\"assistant\",\"content\":\"yo\"}],\"temperature\":0.5,\"max_tokens\":16}");
}

TEST(Wire, ParseReply) {
  EXPECT_EQ(parse_chat_reply(R"({"choices":[{"message":{"role":"assistant","content":"Yes."}}]})"), "Yes.");
  EXPECT_EQ(parse_chat_reply(R"({"choices":[{"text":"No."}]})"), "No.");
  EXPECT_THROW(parse_chat_reply("not json"), TransportError);
  EXPECT_THROW(parse_chat_reply(R"({"choices":[]})"), TransportError);
}

TEST(HttpChatClient, RetriesAuthenticatesAndBoundsInFlight) {
  httplib::Server server;
  std::atomic<int> calls{0}, in_flight{0}, peak{0};
  std::mutex m;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int now = ++in_flight;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    {
      std::lock_guard<std::mutex> lock(m);
      auth = req.get_header_value("Authorization");
    }
    const int n = ++calls;
    --in_flight;
    if (n <= 2) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"Yes."}}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("CAUSALQA_TEST_TOKEN", "secret", 1);
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.token_env = "CAUSALQA_TEST_TOKEN";
  cfg.backoff_seconds = 0.01;
  cfg.max_in_flight = 2;
  HttpChatClient client(cfg);
  EXPECT_EQ(client.complete({{Role::User, "q"}}, {}), "Yes.");
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(auth, "Bearer secret");

  std::vector<std::thread> workers;
  for (int i = 0; i < 6; ++i) workers.emplace_back([&] { client.complete({{Role::User, "q"}}, {}); });
  for (auto& w : workers) w.join();
  EXPECT_LE(peak.load(), 2);

  server.stop();
  t.join();
}

TEST(HttpChatClient, GivesUpAfterAttempts) {
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";  // discard port; nothing listens
  cfg.attempts = 2;
  cfg.backoff_seconds = 0.0;
  cfg.timeout_seconds = 0.5;
  HttpChatClient client(cfg);
  EXPECT_THROW(client.complete({{Role::User, "q"}}, {}), TransportError);
}
