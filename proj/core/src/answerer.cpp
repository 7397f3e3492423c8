#include "causalqa/answerer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <thread>

#include <json.hpp>

namespace causalqa {

Dialogue Dialogue::ask(RenderedQuestion q) {
  Dialogue d;
  std::string text = q.text;
  d.turns.push_back({Role::User, std::move(text), std::move(q)});
  return d;
}

Dialogue Dialogue::then(std::string answer, RenderedQuestion follow_up) const {
  Dialogue d = *this;
  d.turns.push_back({Role::Assistant, std::move(answer), std::nullopt});
  std::string text = follow_up.body;
  d.turns.push_back({Role::User, std::move(text), std::move(follow_up)});
  return d;
}

void Dialogue::check_answerable() const {
  if (turns.empty()) throw UsageError("empty dialogue");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Role want = i % 2 == 0 ? Role::User : Role::Assistant;
    if (turns[i].role != want) throw UsageError("dialogue roles must alternate starting with the user");
  }
  if (turns.back().role != Role::User) throw UsageError("dialogue must end with a user turn");
}

std::vector<ChatMessage> Dialogue::messages() const {
  std::vector<ChatMessage> out;
  out.reserve(turns.size());
  for (const auto& t : turns) out.push_back({t.role, t.text});
  return out;
}

std::string_view answerer_kind_name(AnswererKind k) noexcept {
  switch (k) {
    case AnswererKind::Remote: return "remote";
    case AnswererKind::Oracle: return "oracle";
    case AnswererKind::FactuallyCorrect: return "factual";
    case AnswererKind::UniformlyCorrect: return "uniform";
    case AnswererKind::CausallyConsistent: return "consistent";
  }
  return "?";
}

double noisy_rate(const NoiseSpec& spec, bool x) noexcept {
  const double r = 2.0 * spec.eps * (x ? spec.lambda : 1.0 - spec.lambda);
  return std::clamp(r, 0.0, 1.0);
}

FlipSchedule noisy_flip_schedule(const NoiseSpec& spec, const UnitOutcome& unit, Rng rng) {
  const double rate = noisy_rate(spec, unit.x);
  const bool first = rng.bernoulli(rate);
  const bool second = rng.bernoulli(rate);
  switch (spec.kind) {
    case AnswererKind::FactuallyCorrect: return {false, first};
    case AnswererKind::UniformlyCorrect: return {first, second};
    case AnswererKind::CausallyConsistent: return {first, first};
    default: return {false, false};
  }
}

const RenderedQuestion& last_question(const Dialogue& d) {
  if (d.turns.empty() || !d.turns.back().question)
    throw UsageError("simulated answerers need questions rendered by this toolkit");
  return *d.turns.back().question;
}

const Provenance& last_provenance(const Dialogue& d) {
  const auto& q = last_question(d);
  if (!q.provenance) throw UsageError("question for context " + std::to_string(q.context_id) + " carries no provenance");
  return *q.provenance;
}

std::string OracleAnswerer::answer(const Dialogue& dialogue, const Sampling&, Rng) const {
  dialogue.check_answerable();
  return generate_answer(last_question(dialogue), last_provenance(dialogue).truth);
}

NoisyAnswerer::NoisyAnswerer(NoiseSpec spec) : spec_(spec) {
  if (spec.kind == AnswererKind::Remote || spec.kind == AnswererKind::Oracle)
    throw UsageError("NoisyAnswerer needs a simulated error kind");
  if (!(spec.eps >= 0 && spec.eps <= 1) || !(spec.lambda >= 0 && spec.lambda <= 1))
    throw UsageError("noisy answerer rates must lie in [0, 1]");
}

std::string NoisyAnswerer::answer(const Dialogue& dialogue, const Sampling&, Rng rng) const {
  dialogue.check_answerable();
  const auto& q = last_question(dialogue);
  const auto& prov = last_provenance(dialogue);
  const FlipSchedule flips = noisy_flip_schedule(spec_, prov.unit, rng);
  const bool flip = q.kind == QuestionKind::Factual ? flips.factual : flips.counterfactual;
  return generate_answer(q, prov.truth != flip);
}

std::string NoisyAnswerer::name() const {
  char buf[64];
  auto fmt = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  return std::string(answerer_kind_name(spec_.kind)) + ":" + fmt(spec_.eps) + ":" + fmt(spec_.lambda);
}

RemoteAnswerer::RemoteAnswerer(std::shared_ptr<ChatClient> client, std::string label)
    : client_(std::move(client)), label_(std::move(label)) {
  if (!client_) throw UsageError("remote answerer needs a client");
}

std::string RemoteAnswerer::answer(const Dialogue& dialogue, const Sampling& sampling, Rng) const {
  dialogue.check_answerable();
  return client_->complete(dialogue.messages(), sampling);
}

std::string chat_request_body(const RemoteConfig& cfg, const std::vector<ChatMessage>& messages,
                              const Sampling& sampling) {
  nlohmann::ordered_json body;
  body["model"] = cfg.model;
  auto& msgs = body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    nlohmann::ordered_json j;
    j["role"] = std::string(role_name(m.role));
    j["content"] = m.content;
    msgs.push_back(std::move(j));
  }
  body["temperature"] = sampling.temperature;
  body["max_tokens"] = sampling.max_tokens;
  return body.dump();
}

std::string parse_chat_reply(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw TransportError("reply is not JSON");
  try {
    const auto& choice = j.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("reply has no choices[0].message.content");
  }
}

std::vector<BatchItem> answer_batch(const Answerer& answerer, std::span<const Dialogue> dialogues,
                                    const Sampling& sampling, std::size_t parallelism,
                                    std::span<const Rng> streams) {
  if (parallelism < 1) throw UsageError("parallelism must be at least 1");
  if (streams.size() != dialogues.size()) throw UsageError("one rng stream per dialogue is required");
  std::vector<BatchItem> out(dialogues.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dialogues.size()) return;
      try {
        out[i].text = answerer.answer(dialogues[i], sampling, streams[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t workers = std::min(parallelism, dialogues.size());
  if (workers <= 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

std::vector<BatchItem> answer_batch(const Answerer& answerer, std::span<const Dialogue> dialogues,
                                    const Sampling& sampling, std::size_t parallelism, const Rng& base) {
  std::vector<Rng> streams;
  streams.reserve(dialogues.size());
  for (std::size_t i = 0; i < dialogues.size(); ++i) streams.push_back(base.split(i));
  return answer_batch(answerer, dialogues, sampling, parallelism, streams);
}

namespace {
double parse_rate(std::string_view text, std::string_view spec) {
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !(v >= 0 && v <= 1))
    throw UsageError("bad rate '" + std::string(text) + "' in answerer spec '" + std::string(spec) + "'");
  return v;
}
}  // namespace

std::unique_ptr<Answerer> make_answerer(std::string_view spec, const std::optional<RemoteConfig>& remote) {
  if (spec == "oracle") return std::make_unique<OracleAnswerer>();
  if (spec == "remote") {
    if (!remote) throw UsageError("answerer 'remote' needs a remote endpoint in the run config");
    return std::make_unique<RemoteAnswerer>(std::make_shared<HttpChatClient>(*remote), "remote:" + remote->model);
  }
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  NoiseSpec ns;
  if (parts[0] == "uniform") ns.kind = AnswererKind::UniformlyCorrect;
  else if (parts[0] == "consistent") ns.kind = AnswererKind::CausallyConsistent;
  else if (parts[0] == "factual") ns.kind = AnswererKind::FactuallyCorrect;
  else throw UsageError("unknown answerer '" + std::string(spec) + "'");
  if (parts.size() < 2 || parts.size() > 3)
    throw UsageError("answerer '" + std::string(parts[0]) + "' takes EPS[:LAMBDA], got '" + std::string(spec) + "'");
  ns.eps = parse_rate(parts[1], spec);
  if (parts.size() == 3) ns.lambda = parse_rate(parts[2], spec);
  return std::make_unique<NoisyAnswerer>(ns);
}

}  // namespace causalqa
