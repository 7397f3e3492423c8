#include "causalqa/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace causalqa {

namespace {

using json = nlohmann::json;

void only_keys(const json& j, std::initializer_list<std::string_view> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto key : keys) ok = ok || key == k;
    if (!ok) throw UsageError("unknown key '" + where + k + "' in run config");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where = "") {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) throw UsageError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw UsageError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw UsageError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw UsageError("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    throw UsageError("run config key '" + where + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw UsageError("run config must be a JSON object");
  only_keys(j,
            {"n_contexts", "m_samples", "repeats", "seed", "answerer", "extractor", "method", "temperature",
             "max_tokens", "parallel", "variant", "answer_mode", "remote"},
            "");
  RunConfig c;
  read(j, "n_contexts", c.eval.n_contexts);
  read(j, "m_samples", c.eval.m_samples);
  read(j, "repeats", c.eval.repeats);
  read(j, "seed", c.eval.seed);
  read(j, "answerer", c.eval.answerer);
  read(j, "extractor", c.eval.extractor);
  read(j, "method", c.eval.method);
  read(j, "temperature", c.eval.temperature);
  read(j, "max_tokens", c.eval.max_tokens);
  read(j, "parallel", c.eval.parallelism);
  c.gen.n_contexts = c.eval.n_contexts;
  c.gen.m_samples = c.eval.m_samples;
  c.gen.seed = c.eval.seed;
  c.gen.temperature = c.eval.temperature;
  c.gen.max_tokens = c.eval.max_tokens;
  c.gen.parallelism = c.eval.parallelism;
  std::string variant = std::string(variant_name(c.gen.variant));
  read(j, "variant", variant);
  auto v = parse_variant(variant);
  if (!v) throw UsageError("unknown variant '" + variant + "' in run config");
  c.gen.variant = *v;
  std::string mode = "template";
  read(j, "answer_mode", mode);
  if (mode == "template") c.gen.answer_mode = AnswerMode::Template;
  else if (mode == "remote") c.gen.answer_mode = AnswerMode::Remote;
  else throw UsageError("answer_mode must be 'template' or 'remote'");
  if (auto it = j.find("remote"); it != j.end()) {
    if (!it->is_object()) throw UsageError("run config key 'remote' must be an object");
    only_keys(*it,
              {"base_url", "path", "model", "token_env", "timeout_seconds", "max_in_flight", "attempts",
               "backoff_seconds"},
              "remote.");
    RemoteConfig r;
    read(*it, "base_url", r.base_url, "remote.");
    read(*it, "path", r.path, "remote.");
    read(*it, "model", r.model, "remote.");
    read(*it, "token_env", r.token_env, "remote.");
    read(*it, "timeout_seconds", r.timeout_seconds, "remote.");
    read(*it, "max_in_flight", r.max_in_flight, "remote.");
    read(*it, "attempts", r.attempts, "remote.");
    read(*it, "backoff_seconds", r.backoff_seconds, "remote.");
    c.remote = r;
  }
  c.eval.check();
  if (c.eval.answerer != "remote") make_answerer(c.eval.answerer);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open run config '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace causalqa
