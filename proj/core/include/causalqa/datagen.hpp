#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "causalqa/answerer.hpp"
#include "causalqa/chat.hpp"
#include "causalqa/dsl.hpp"
#include "causalqa/qa.hpp"
#include "causalqa/scm.hpp"

namespace causalqa {

/// OnlyF and OnlyCF keep one question kind and draw twice the contexts so the
/// example count matches F&CF.  OnlyFx2 is the same policy under the name used
/// for the generalization baselines.
enum class DatasetVariant { OnlyF, OnlyCF, FAndCF, OnlyFx2 };
std::string_view variant_name(DatasetVariant v) noexcept;  // "only-f", "only-cf", "f-and-cf", "only-fx2"
std::optional<DatasetVariant> parse_variant(std::string_view s) noexcept;

enum class AnswerMode { Template, Remote };

struct GenConfig {
  std::size_t n_contexts = 100;
  std::size_t m_samples = 10;
  DatasetVariant variant = DatasetVariant::FAndCF;
  std::uint64_t seed = 0;
  AnswerMode answer_mode = AnswerMode::Template;
  double temperature = 1.0;
  int max_tokens = 256;
  std::size_t parallelism = 1;
  std::string mode;  // plan mode recorded in meta; may be empty

  /// Throws UsageError.  Preference algorithms need m_samples >= 2.
  void check(bool preference) const;
  std::size_t contexts_drawn() const noexcept;
  bool wants_factual() const noexcept;
  bool wants_counterfactual() const noexcept;
};

struct RecordMeta {
  std::string world;
  std::string edge;
  std::string mode;
  std::uint64_t context_id = 0;
  std::string kind;  // "factual", "counterfactual" or "dialogue"
  std::uint64_t seed = 0;
  bool x = false, y = false, y_cf = false;
  std::optional<std::size_t> m, m_prime;
  std::optional<bool> truth;
  std::optional<int> reward_chosen, reward_rejected;
  friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct SupervisedExample {
  std::string prompt;
  std::string completion;
  RecordMeta meta;
  friend bool operator==(const SupervisedExample&, const SupervisedExample&) = default;
};

struct PreferenceRecord {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  RecordMeta meta;
  friend bool operator==(const PreferenceRecord&, const PreferenceRecord&) = default;
};

/// Dialogues sharing the factual question as prefix; chosen and rejected are
/// the assistant/user/assistant continuations.
struct DialoguePreference {
  std::vector<ChatMessage> prefix;
  std::vector<ChatMessage> chosen;
  std::vector<ChatMessage> rejected;
  RecordMeta meta;
  friend bool operator==(const DialoguePreference&, const DialoguePreference&) = default;
};

/// Answer generator H.  Template mode when `remote` is null.
struct Generator {
  ChatClient* remote = nullptr;
  int attempts = 3;
  std::string operator()(const RenderedQuestion& q, bool truth) const;
};

/// Extractor h.  Rule-based when `remote` is null; remote failures count as
/// undecidable.
struct Extractor {
  ChatClient* remote = nullptr;
  std::optional<bool> operator()(const RenderedQuestion& q, std::string_view answer) const;
};

template <class T>
struct GenResult {
  std::vector<T> records;
  std::vector<std::string> warnings;  // skipped items
};

/// Algorithm 1: one factual and/or one counterfactual pair per context.
GenResult<SupervisedExample> gen_supervised(const World& world, const Edge& edge, const GenConfig& cfg,
                                            const Generator& h = {});
/// Algorithm 2: M answers per question; a record for every (m, m') where
/// answer m is right and answer m' is not.
GenResult<PreferenceRecord> gen_preference_cf(const World& world, const Edge& edge, const GenConfig& cfg,
                                              const Answerer& model, const Extractor& h = {});
/// Algorithm 3: M two-turn dialogues per context scored by ccf_reward; a record
/// for every (m, m') with strictly larger reward on the m side.
GenResult<DialoguePreference> gen_preference_ccf(const World& world, const Edge& edge, const GenConfig& cfg,
                                                 const Answerer& model, const Extractor& h = {});

enum class DatasetFormat { Sft, Dpo, DpoDialogue };
std::string_view format_name(DatasetFormat f) noexcept;  // "sft", "dpo", "dpo-dialogue"
std::optional<DatasetFormat> parse_format(std::string_view s) noexcept;

using Dataset =
    std::variant<std::vector<SupervisedExample>, std::vector<PreferenceRecord>, std::vector<DialoguePreference>>;
DatasetFormat format_of(const Dataset& d) noexcept;
std::size_t dataset_size(const Dataset& d) noexcept;

/// JSON lines, one record per line, fixed key order.
std::string to_jsonl(const Dataset& d);
void write_dataset(const Dataset& d, const std::string& path);
/// Strict inverse of to_jsonl.  Throws DatasetError naming the line.
Dataset parse_dataset(std::string_view text, DatasetFormat format);
Dataset read_dataset(const std::string& path, DatasetFormat format);

class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace causalqa
