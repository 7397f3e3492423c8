#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/chat.hpp"
#include "causalqa/qa.hpp"
#include "causalqa/rng.hpp"

namespace causalqa {

struct Turn {
  Role role = Role::User;
  std::string text;
  std::optional<RenderedQuestion> question;  // user turns produced by this toolkit
};

/// Alternating user/assistant turns starting with the user.
struct Dialogue {
  std::vector<Turn> turns;

  static Dialogue ask(RenderedQuestion q);           // one user turn with the full question text
  Dialogue then(std::string answer, RenderedQuestion follow_up) const;  // follow-up uses q.body
  /// Throws UsageError unless roles alternate, start with the user and end
  /// with a user turn.
  void check_answerable() const;
  std::vector<ChatMessage> messages() const;
};

enum class AnswererKind { Remote, Oracle, FactuallyCorrect, UniformlyCorrect, CausallyConsistent };

std::string_view answerer_kind_name(AnswererKind k) noexcept;

/// Error model of the simulated answerers.  `lambda` shifts the error budget
/// between units with the cause present and units with it absent.
struct NoiseSpec {
  AnswererKind kind = AnswererKind::UniformlyCorrect;
  double eps = 0.0;
  double lambda = 0.5;
};

/// Per-unit flip probability: 2*eps*lambda when X holds, 2*eps*(1-lambda)
/// otherwise, clamped to [0, 1].
double noisy_rate(const NoiseSpec& spec, bool x) noexcept;

struct FlipSchedule {
  bool factual = false;
  bool counterfactual = false;
  friend bool operator==(const FlipSchedule&, const FlipSchedule&) = default;
};

/// Which of a unit's two answers a simulated answerer gets wrong.  The
/// schedule is a pure function of the stream, so the factual and the
/// counterfactual answer drawn with the same stream agree on it.
FlipSchedule noisy_flip_schedule(const NoiseSpec& spec, const UnitOutcome& unit, Rng rng);

class Answerer {
 public:
  virtual ~Answerer() = default;
  /// Answers the last (user) turn.  `rng` is this answer's private stream.
  virtual std::string answer(const Dialogue& dialogue, const Sampling& sampling, Rng rng) const = 0;
  virtual std::string name() const = 0;
  virtual bool simulated() const { return true; }
};

/// Always right; reads the truth from the question's provenance.
class OracleAnswerer final : public Answerer {
 public:
  std::string answer(const Dialogue& dialogue, const Sampling& sampling, Rng rng) const override;
  std::string name() const override { return "oracle"; }
};

class NoisyAnswerer final : public Answerer {
 public:
  explicit NoisyAnswerer(NoiseSpec spec);
  std::string answer(const Dialogue& dialogue, const Sampling& sampling, Rng rng) const override;
  std::string name() const override;
  const NoiseSpec& spec() const noexcept { return spec_; }

 private:
  NoiseSpec spec_;
};

class RemoteAnswerer final : public Answerer {
 public:
  explicit RemoteAnswerer(std::shared_ptr<ChatClient> client, std::string label = "remote");
  std::string answer(const Dialogue& dialogue, const Sampling& sampling, Rng rng) const override;
  std::string name() const override { return label_; }
  bool simulated() const override { return false; }

 private:
  std::shared_ptr<ChatClient> client_;
  std::string label_;
};

/// Question provenance of the dialogue's last turn; throws UsageError if absent.
const Provenance& last_provenance(const Dialogue& d);
const RenderedQuestion& last_question(const Dialogue& d);

struct RemoteConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  std::string token_env;         // environment variable holding the bearer token
  double timeout_seconds = 60.0;
  std::size_t max_in_flight = 4;
  int attempts = 3;              // total tries per request
  double backoff_seconds = 0.5;  // doubled after each failed try
};

/// Request document with keys in the order model, messages, temperature,
/// max_tokens.  Byte-stable for equal inputs.
std::string chat_request_body(const RemoteConfig& cfg, const std::vector<ChatMessage>& messages,
                              const Sampling& sampling);
/// Content of the first choice; throws TransportError on malformed replies.
std::string parse_chat_reply(std::string_view body);

/// HTTP(S) chat-completion client with retries and a bounded number of
/// concurrent requests.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(RemoteConfig cfg);
  ~HttpChatClient() override;
  std::string complete(const std::vector<ChatMessage>& messages, const Sampling& sampling) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BatchItem {
  std::optional<std::string> text;
  std::string error;
  bool ok() const noexcept { return text.has_value(); }
};

/// Answers every dialogue with at most `parallelism` concurrent calls.
/// Results are positional; a failing item records its error and the batch
/// continues.  Output does not depend on scheduling.
std::vector<BatchItem> answer_batch(const Answerer& answerer, std::span<const Dialogue> dialogues,
                                    const Sampling& sampling, std::size_t parallelism,
                                    std::span<const Rng> streams);
/// Same, with the stream of item i derived as base.split(i).
std::vector<BatchItem> answer_batch(const Answerer& answerer, std::span<const Dialogue> dialogues,
                                    const Sampling& sampling, std::size_t parallelism, const Rng& base);

/// "oracle", "uniform:EPS[:LAMBDA]", "consistent:EPS[:LAMBDA]",
/// "factual:EPS[:LAMBDA]" or "remote" (needs `remote`).  Throws UsageError.
std::unique_ptr<Answerer> make_answerer(std::string_view spec, const std::optional<RemoteConfig>& remote = std::nullopt);

}  // namespace causalqa
