#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "causalqa/experiment.hpp"
#include "causalqa/worlds.hpp"

using namespace causalqa;

namespace {

const World& world(BuiltinWorldId id) {
  static std::map<BuiltinWorldId, World> cache;
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, load_builtin(id)).first;
  return it->second;
}

void BM_SampleContext(benchmark::State& st) {
  const World& w = world(static_cast<BuiltinWorldId>(st.range(0)));
  const Rng master(1);
  std::uint64_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(sample_context(w.model, master, i++));
  st.SetLabel(w.name());
}
BENCHMARK(BM_SampleContext)->DenseRange(0, 5);

void BM_PotentialOutcomes(benchmark::State& st) {
  const World& w = world(BuiltinWorldId::Engineering);
  const Context ctx = sample_context(w.model, Rng(1), 0);
  const Edge e = w.model.edges().front();
  for (auto _ : st) benchmark::DoNotOptimize(potential_outcomes(w.model, ctx, e));
}
BENCHMARK(BM_PotentialOutcomes);

void BM_RenderUnit(benchmark::State& st) {
  const World& w = world(BuiltinWorldId::Healthcare);
  const Context ctx = sample_context(w.model, Rng(1), 0);
  const Edge e{"ERPR", "surgery"};
  for (auto _ : st) benchmark::DoNotOptimize(render_unit(w, ctx, e));
}
BENCHMARK(BM_RenderUnit);

void BM_ExtractRule(benchmark::State& st) {
  const std::string answer = "Dave would not have been happy, because Anna and Bill are not both happy.";
  for (auto _ : st) benchmark::DoNotOptimize(extract_rule(answer));
}
BENCHMARK(BM_ExtractRule);

void BM_SampleMetrics(benchmark::State& st) {
  std::vector<UnitEval> units(static_cast<std::size_t>(st.range(0)));
  Rng g(3);
  for (auto& u : units) {
    u.outcome.x = g.bernoulli(0.5);
    u.outcome.y = g.bernoulli(0.5);
    u.outcome.y_cf = g.bernoulli(0.5);
    u.y_hat = g.bernoulli(0.5);
    u.y_cf_hat = g.bernoulli(0.5);
  }
  for (auto _ : st) benchmark::DoNotOptimize(sample_metrics(units));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SampleMetrics)->Arg(100)->Arg(10000);

void BM_EvaluateOracle(benchmark::State& st) {
  const World& w = world(BuiltinWorldId::CandyBipartite);
  const auto p = plan(w, GeneralizationMode::InDomain);
  EvalConfig cfg;
  cfg.n_contexts = 100;
  cfg.m_samples = 10;
  cfg.repeats = 1;
  cfg.parallelism = static_cast<std::size_t>(st.range(0));
  const OracleAnswerer o;
  for (auto _ : st) benchmark::DoNotOptimize(evaluate(w, p, o, cfg));
}
BENCHMARK(BM_EvaluateOracle)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ClosedFormSweep(benchmark::State& st) {
  const std::vector<double> eps{0.05, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> lambda;
  for (int i = 0; i <= 10; ++i) lambda.push_back(i / 10.0);
  for (auto _ : st) benchmark::DoNotOptimize(sweep_fig3(eps, lambda, TupleOrder::YxFirst));
}
BENCHMARK(BM_ClosedFormSweep)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
