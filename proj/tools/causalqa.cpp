#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causalqa/answerer.hpp"
#include "causalqa/config.hpp"
#include "causalqa/datagen.hpp"
#include "causalqa/diagnostics.hpp"
#include "causalqa/dsl.hpp"
#include "causalqa/experiment.hpp"
#include "causalqa/metrics.hpp"
#include "causalqa/qa.hpp"
#include "causalqa/worlds.hpp"

using namespace causalqa;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

Edge edge_arg(const std::string& text) {
  auto e = parse_edge(text);
  if (!e) throw UsageError("bad edge '" + text + "' (expected CAUSE->EFFECT or CAUSE:EFFECT)");
  return *e;
}

std::string value_text(const CausalModel& model, std::size_t exo, const Value& v) {
  return render_value(v, model.display_decimals(exo));
}

int cmd_validate(const std::string& target) {
  std::string source, file = target;
  if (auto id = parse_world_id(target)) {
    source = std::string(builtin_source(*id));
    file = std::string(world_file_name(*id));
  } else {
    source = read_file(target);
  }
  auto parsed = parse(source);
  std::vector<Diagnostic> diags = parsed.diagnostics;
  std::optional<World> world;
  if (parsed.ok()) {
    auto lowered = lower(*parsed.file);
    diags = lowered.diagnostics;
    world = std::move(lowered.world);
  }
  if (!world) {
    std::cout << format_diagnostics(diags, file);
    return 1;
  }
  std::string modes;
  for (auto m : availability(*world)) modes += (modes.empty() ? "" : ", ") + std::string(mode_name(m));
  std::cout << file << ": ok: world '" << world->name() << "', " << world->model.exogenous().size()
            << " exogenous, " << world->model.endogenous().size() << " endogenous, " << world->model.edges().size()
            << " edges; modes: " << (modes.empty() ? "none" : modes) << "\n";
  return 0;
}

int cmd_sample(const std::string& target, std::size_t n, std::uint64_t seed, bool json) {
  const World world = resolve_world(target);
  const auto& model = world.model;
  const Rng master(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const Context ctx = sample_context(model, master, i);
    const Assignment a = evaluate(model, ctx);
    std::string line = json ? "{\"id\":" + std::to_string(ctx.id) : "context " + std::to_string(ctx.id) + ":";
    auto field = [&](const std::string& name, const std::string& text, bool quoted) {
      if (json) line += ",\"" + name + "\":" + (quoted ? "\"" + text + "\"" : text);
      else line += " " + name + "=" + text;
    };
    for (std::size_t k = 0; k < model.exogenous().size(); ++k)
      field(model.exogenous()[k].name, value_text(model, k, ctx.values[k]),
            std::holds_alternative<std::string>(ctx.values[k]));
    if (!json) line += " |";
    for (std::size_t k = 0; k < model.endogenous().size(); ++k)
      field(model.endogenous()[k].name, render_value(a.values[k]), std::holds_alternative<std::string>(a.values[k]));
    std::cout << line << (json ? "}" : "") << "\n";
  }
  return 0;
}

int cmd_ask(const std::string& target, const std::string& edge_text, std::uint64_t seed, std::uint64_t index) {
  const World world = resolve_world(target);
  const Edge edge = edge_arg(edge_text);
  const Context ctx = sample_context(world.model, Rng(seed), index);
  const auto [f, cf] = render_unit(world, ctx, edge);
  const auto& u = f.provenance->unit;
  std::cout << "[factual] " << f.text << "\n\n[counterfactual: do(" << edge.cause << " = "
            << (cf.forced ? "true" : "false") << ")] " << cf.text << "\n\n";
  std::cout << "truth: " << edge.cause << "=" << (u.x ? "true" : "false") << " " << edge.effect << "="
            << (u.y ? "true" : "false") << " " << edge.effect << "_cf=" << (u.y_cf ? "true" : "false") << "\n";
  return 0;
}

struct Common {
  std::string config;
  std::optional<std::size_t> n, m, repeats, parallel;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> answerer;
};

RunConfig load_config(const Common& c) {
  RunConfig rc = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.n) rc.eval.n_contexts = rc.gen.n_contexts = *c.n;
  if (c.m) rc.eval.m_samples = rc.gen.m_samples = *c.m;
  if (c.repeats) rc.eval.repeats = *c.repeats;
  if (c.seed) rc.eval.seed = rc.gen.seed = *c.seed;
  if (c.answerer) rc.eval.answerer = *c.answerer;
  const bool remote = rc.eval.answerer == "remote";
  const std::size_t par = c.parallel ? *c.parallel : (remote ? 4 : rc.eval.parallelism);
  rc.eval.parallelism = rc.gen.parallelism = par;
  return rc;
}

std::shared_ptr<ChatClient> remote_client(const RunConfig& rc, const char* what) {
  if (!rc.remote) throw UsageError(std::string(what) + " needs a 'remote' section in the run config");
  return std::make_shared<HttpChatClient>(*rc.remote);
}

void print_report(const MetricsReport& r) {
  std::printf("%s  %s  %s  %s\n", r.meta.world.c_str(), r.meta.mode.c_str(), r.meta.edge.c_str(),
              r.meta.method.c_str());
  for (Metric m : kMetrics) {
    const Stat& s = r.get(m);
    if (s.present())
      std::printf("  %-8s %8.4f  (std %.4f, n=%zu)\n", std::string(metric_name(m)).c_str(), s.mean, s.std, s.count);
    else
      std::printf("  %-8s %8s\n", std::string(metric_name(m)).c_str(), "n/a");
  }
  if (r.undecidable) std::printf("  undecidable answers: %zu (failed calls: %zu)\n", r.undecidable, r.failed);
  for (auto rep : r.flagged_repeats) std::printf("  warning: repeat %zu has more than 10%% undecidable answers\n", rep);
}

int cmd_eval(const std::string& target, const std::string& mode_text, const std::optional<std::string>& test_edge,
             const Common& common, const std::string& method, const std::string& out, const std::string& json_out) {
  const World world = resolve_world(target);
  auto mode = parse_mode(mode_text);
  if (!mode) throw UsageError("unknown mode '" + mode_text + "'");
  PlanOverrides ov;
  if (test_edge) ov.test = edge_arg(*test_edge);
  const ExperimentPlan p = plan(world, *mode, ov);
  RunConfig rc = load_config(common);
  if (!method.empty()) rc.eval.method = method;
  auto answerer = make_answerer(rc.eval.answerer, rc.remote);
  std::shared_ptr<ChatClient> extractor_client;
  if (rc.eval.extractor == "remote") extractor_client = remote_client(rc, "the remote extractor");
  const MetricsReport r = evaluate(world, p, *answerer, rc.eval, Extractor{extractor_client.get()});
  if (!out.empty()) {
    const MetricsReport one[] = {r};
    write_file(out, to_csv(one));
  }
  if (!json_out.empty()) write_file(json_out, to_json(r) + "\n");
  print_report(r);
  return 0;
}

int cmd_gen(const std::string& target, const std::vector<std::string>& edges, const std::string& mode_text,
            const std::string& alg_text, const std::string& variant_text, const Common& common,
            const std::string& out) {
  const World world = resolve_world(target);
  auto alg = parse_algorithm(alg_text);
  if (!alg) throw UsageError("unknown algorithm '" + alg_text + "' (sft, dpo or ccf)");
  RunConfig rc = load_config(common);
  if (!variant_text.empty()) {
    auto v = parse_variant(variant_text);
    if (!v) throw UsageError("unknown variant '" + variant_text + "'");
    rc.gen.variant = *v;
  }
  std::vector<Edge> targets;
  if (!mode_text.empty()) {
    auto mode = parse_mode(mode_text);
    if (!mode) throw UsageError("unknown mode '" + mode_text + "'");
    const ExperimentPlan p = plan(world, *mode);
    targets = p.train_edges;
    rc.gen.mode = mode_text;
    if (!common.n) rc.gen.n_contexts = p.contexts_per_edge;
  }
  for (const auto& e : edges) targets.push_back(edge_arg(e));
  if (targets.empty()) throw UsageError("give --edge or --mode");

  std::unique_ptr<Answerer> model;
  if (*alg != Algorithm::Sft) model = make_answerer(rc.eval.answerer, rc.remote);
  std::shared_ptr<ChatClient> gen_client, ext_client;
  if (rc.gen.answer_mode == AnswerMode::Remote) gen_client = remote_client(rc, "remote answer generation");
  if (rc.eval.extractor == "remote") ext_client = remote_client(rc, "the remote extractor");
  const GenOutput g = generate(world, targets, *alg, rc.gen, model.get(), Generator{gen_client.get()},
                               Extractor{ext_client.get()});
  for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
  write_dataset(g.data, out);
  const std::size_t n = dataset_size(g.data);
  if (n == 0) std::cerr << "warning: no records generated (no contrasting answers)\n";
  std::cout << "wrote " << n << " " << format_name(format_of(g.data)) << " records to " << out << "\n";
  return 0;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("bad number '" + item + "' in list");
    out.push_back(v);
  }
  return out;
}

int cmd_sweep(const std::string& order_text, const std::string& eps_text, std::size_t lambda_steps,
              const std::string& out) {
  std::vector<TupleOrder> orders;
  if (order_text == "both") orders = {TupleOrder::YxFirst, TupleOrder::YnxFirst};
  else if (auto o = parse_tuple_order(order_text)) orders = {*o};
  else throw UsageError("unknown tuple order '" + order_text + "'");
  if (lambda_steps < 2) throw UsageError("--lambda-steps must be at least 2");
  const auto eps = parse_list(eps_text);
  std::vector<double> lambdas;
  for (std::size_t i = 0; i < lambda_steps; ++i) lambdas.push_back(static_cast<double>(i) / (lambda_steps - 1));
  std::string csv;
  for (auto order : orders) {
    auto rows = sweep_fig3(eps, lambdas, order);
    auto part = sweep_csv(rows, order);
    csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
  }
  if (out.empty()) std::cout << csv;
  else write_file(out, csv);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& base, const std::string& out) {
  std::vector<MetricsReport> reports;
  for (const auto& path : inputs) {
    try {
      for (auto& r : parse_report_csv(read_file(path))) reports.push_back(std::move(r));
    } catch (const UsageError& e) {
      throw UsageError(path + ": " + e.what());
    }
  }
  const auto scores = normalize(reports, base);
  if (!out.empty()) write_file(out, normalized_csv(scores));
  std::cout << normalized_table(scores);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal-reasoning question answering toolkit"};
  app.require_subcommand(1);

  std::string world, edge, mode, alg = "sft", variant, out, json_out, method, base = "Base";
  std::optional<std::string> test_edge;
  std::vector<std::string> edges, inputs;
  std::size_t n = 5;
  std::uint64_t seed = 0, index = 0;
  bool json = false;
  Common common;
  std::string order = "both", eps_text = "0.05,0.1,0.2,0.3,0.4";
  std::size_t lambda_steps = 11;

  auto* validate = app.add_subcommand("validate", "Check a world file and print diagnostics");
  validate->add_option("world", world, "Builtin world id or path")->required();

  auto* sample = app.add_subcommand("sample", "Print sampled contexts with their endogenous values");
  sample->add_option("world", world, "Builtin world id or path")->required();
  sample->add_option("--n", n, "Number of contexts")->capture_default_str();
  sample->add_option("--seed", seed, "Master seed")->capture_default_str();
  sample->add_flag("--json", json, "One JSON object per line");

  auto* ask = app.add_subcommand("ask", "Render the factual and counterfactual question for one context");
  ask->add_option("world", world, "Builtin world id or path")->required();
  ask->add_option("--edge", edge, "Edge CAUSE->EFFECT")->required();
  ask->add_option("--context-seed", seed, "Master seed of the context draw")->capture_default_str();
  ask->add_option("--index", index, "Context index under the seed")->capture_default_str();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config, "Run-config JSON file");
    cmd->add_option("--n", common.n, "Contexts (per edge for gen-data)");
    cmd->add_option("--m", common.m, "Answer samples per question");
    cmd->add_option("--seed", common.seed, "Master seed");
    cmd->add_option("--answerer", common.answerer, "oracle | uniform:EPS[:LAMBDA] | consistent:... | factual:... | remote");
    cmd->add_option("--parallel", common.parallel, "Concurrent answerer calls");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a fine-tuning dataset");
  gen->add_option("world", world, "Builtin world id or path")->required();
  gen->add_option("--edge", edges, "Edge(s) to generate for");
  gen->add_option("--mode", mode, "Use the train edges of this mode's plan");
  gen->add_option("--alg", alg, "sft | dpo | ccf")->capture_default_str();
  gen->add_option("--variant", variant, "only-f | only-cf | f-and-cf | only-fx2");
  gen->add_option("--out", out, "Output JSONL file")->required();
  add_common(gen);

  auto* eval = app.add_subcommand("eval", "Evaluate an answerer on a plan's test edge");
  eval->add_option("world", world, "Builtin world id or path")->required();
  eval->add_option("--mode", mode, "Generalization mode")->required();
  eval->add_option("--test-edge", test_edge, "Select among plans of the mode");
  eval->add_option("--repeats", common.repeats, "Repeats");
  eval->add_option("--method", method, "Method label in the report");
  eval->add_option("--out", out, "Report CSV");
  eval->add_option("--json", json_out, "Report JSON");
  add_common(eval);

  auto* sweep = app.add_subcommand("sweep-fig3", "Closed-form sweep over the six-unit illustrative world");
  sweep->add_option("--order", order, "yx-first | ynx-first | both")->capture_default_str();
  sweep->add_option("--eps", eps_text, "Comma-separated error levels")->capture_default_str();
  sweep->add_option("--lambda-steps", lambda_steps, "Grid points on [0, 1]")->capture_default_str();
  sweep->add_option("--out", out, "CSV output (stdout when omitted)");

  auto* report = app.add_subcommand("report", "Normalize report CSVs against a base method");
  report->add_option("--in", inputs, "Report CSV files")->required();
  report->add_option("--base", base, "Base method label")->capture_default_str();
  report->add_option("--out", out, "Normalized CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(world);
    if (*sample) return cmd_sample(world, n, seed, json);
    if (*ask) return cmd_ask(world, edge, seed, index);
    if (*gen) return cmd_gen(world, edges, mode, alg, variant, common, out);
    if (*eval) return cmd_eval(world, mode, test_edge, common, method, out, json_out);
    if (*sweep) return cmd_sweep(order, eps_text, lambda_steps, out);
    if (*report) return cmd_report(inputs, base, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
