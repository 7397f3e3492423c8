#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "causalqa/chat.hpp"
#include "causalqa/dsl.hpp"
#include "causalqa/scm.hpp"
#include "causalqa/templates.hpp"

namespace causalqa {

enum class QuestionKind { Factual, Interventional };

std::string_view kind_name(QuestionKind k) noexcept;  // "factual" / "counterfactual"

/// Ground truth attached to questions produced by this toolkit.  Simulated
/// answerers read it instead of parsing the question text.
struct Provenance {
  UnitOutcome unit;
  bool truth = false;
};

struct RenderedQuestion {
  QuestionKind kind = QuestionKind::Factual;
  std::string text;  // narrative followed by the question
  std::string body;  // the question alone, used as a follow-up turn
  std::uint64_t context_id = 0;
  std::string cause;   // interventional only
  bool forced = false; // interventional only
  std::string effect;
  std::string yes_clause;  // resolved answer clauses for this kind of question
  std::string no_clause;
  std::optional<Provenance> provenance;
};

/// Throws UsageError when the effect has no template or a placeholder cannot
/// be resolved.
RenderedQuestion render_factual(const World& world, const Context& ctx, std::string_view effect);
RenderedQuestion render_interventional(const World& world, const Context& ctx, std::string_view cause, bool forced,
                                       std::string_view effect);

/// Factual question and the counterfactual question do(cause = not X) for one
/// unit, both carrying provenance.
std::pair<RenderedQuestion, RenderedQuestion> render_unit(const World& world, const Context& ctx, const Edge& edge);

enum class AnswerSource { Rule, Remote };

struct BinaryAnswer {
  bool value = false;  // true = positive
  AnswerSource source = AnswerSource::Rule;
  friend bool operator==(const BinaryAnswer&, const BinaryAnswer&) = default;
};

/// Rule-based extractor h.  A leading "yes"/"no" decides; otherwise the text
/// is scanned for affirming and negating phrases.  Nullopt = undecidable.
std::optional<BinaryAnswer> extract_rule(std::string_view answer);

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Versioned prompt assets.
std::string_view extractor_prompt_template();
std::string_view generator_prompt_template();
std::string extractor_prompt(std::string_view question, std::string_view answer);
std::string generator_prompt(std::string_view question, bool truth);

/// Remote extractor: asks the client whether the answer means POSITIVE or
/// NEGATIVE.  Throws ExtractionError on any other reply.
BinaryAnswer extract_remote(std::string_view answer, std::string_view question, ChatClient& client);

/// Generator H in template mode: "Yes, <clause>." or "No, <clause>.".
std::string generate_answer(const RenderedQuestion& q, bool truth);

/// Generator H through a chat model.  Replies whose rule extraction differs
/// from `truth` are retried; after `attempts` failures throws GenerationError.
std::string generate_answer_remote(const RenderedQuestion& q, bool truth, ChatClient& client, int attempts = 3);

}  // namespace causalqa
