#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "causalqa/datagen.hpp"
#include "causalqa/diagnostics.hpp"

namespace causalqa {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 3> kFormatNames{"sft", "dpo", "dpo-dialogue"};

ojson meta_json(const RecordMeta& m) {
  ojson j;
  j["world"] = m.world;
  j["edge"] = m.edge;
  j["mode"] = m.mode;
  j["context_id"] = m.context_id;
  j["kind"] = m.kind;
  j["seed"] = m.seed;
  j["x"] = m.x;
  j["y"] = m.y;
  j["y_cf"] = m.y_cf;
  if (m.m) j["m"] = *m.m;
  if (m.m_prime) j["m_prime"] = *m.m_prime;
  if (m.truth) j["truth"] = *m.truth;
  if (m.reward_chosen) j["reward_chosen"] = *m.reward_chosen;
  if (m.reward_rejected) j["reward_rejected"] = *m.reward_rejected;
  return j;
}

ojson messages_json(const std::vector<ChatMessage>& msgs) {
  ojson a = ojson::array();
  for (const auto& m : msgs) {
    ojson j;
    j["role"] = std::string(role_name(m.role));
    j["content"] = m.content;
    a.push_back(std::move(j));
  }
  return a;
}

ojson record_json(const SupervisedExample& r) {
  ojson j;
  j["prompt"] = r.prompt;
  j["completion"] = r.completion;
  j["meta"] = meta_json(r.meta);
  return j;
}

ojson record_json(const PreferenceRecord& r) {
  ojson j;
  j["prompt"] = r.prompt;
  j["chosen"] = r.chosen;
  j["rejected"] = r.rejected;
  j["meta"] = meta_json(r.meta);
  return j;
}

ojson record_json(const DialoguePreference& r) {
  ojson j;
  j["messages_prefix"] = messages_json(r.prefix);
  j["chosen_messages"] = messages_json(r.chosen);
  j["rejected_messages"] = messages_json(r.rejected);
  j["meta"] = meta_json(r.meta);
  return j;
}

// Strict object reader: every key must be known and every required key present.
class Fields {
 public:
  Fields(const nlohmann::json& j, std::size_t line, std::string where) : j_(j), line_(line), where_(std::move(where)) {
    if (!j.is_object()) fail(where_ + " must be an object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool known = false;
      for (auto key : keys) known = known || key == k;
      if (!known) fail("unknown field '" + k + "' in " + where_);
    }
  }

  const nlohmann::json& at(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field '" + std::string(key) + "' in " + where_);
    return *it;
  }
  bool has(const char* key) const { return j_.contains(key); }

  std::string str(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail("field '" + std::string(key) + "' must be a string");
    return v.get<std::string>();
  }
  bool boolean(const char* key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) fail("field '" + std::string(key) + "' must be a boolean");
    return v.get<bool>();
  }
  std::uint64_t uint(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_unsigned()) fail("field '" + std::string(key) + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  [[noreturn]] void fail(const std::string& what) const { throw DatasetError(line_, what); }

 private:
  const nlohmann::json& j_;
  std::size_t line_;
  std::string where_;
};

RecordMeta parse_meta(const nlohmann::json& j, std::size_t line) {
  Fields f(j, line, "meta");
  f.allow_only({"world", "edge", "mode", "context_id", "kind", "seed", "x", "y", "y_cf", "m", "m_prime", "truth",
                "reward_chosen", "reward_rejected"});
  RecordMeta m;
  m.world = f.str("world");
  m.edge = f.str("edge");
  m.mode = f.str("mode");
  m.context_id = f.uint("context_id");
  m.kind = f.str("kind");
  if (m.kind != "factual" && m.kind != "counterfactual" && m.kind != "dialogue")
    f.fail("unknown kind '" + m.kind + "'");
  m.seed = f.uint("seed");
  m.x = f.boolean("x");
  m.y = f.boolean("y");
  m.y_cf = f.boolean("y_cf");
  if (f.has("m")) m.m = f.uint("m");
  if (f.has("m_prime")) m.m_prime = f.uint("m_prime");
  if (f.has("truth")) m.truth = f.boolean("truth");
  if (f.has("reward_chosen")) m.reward_chosen = static_cast<int>(f.uint("reward_chosen"));
  if (f.has("reward_rejected")) m.reward_rejected = static_cast<int>(f.uint("reward_rejected"));
  return m;
}

std::vector<ChatMessage> parse_messages(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.is_array()) throw DatasetError(line, std::string("field '") + key + "' must be an array");
  std::vector<ChatMessage> out;
  for (const auto& e : j) {
    Fields f(e, line, std::string(key) + " entry");
    f.allow_only({"role", "content"});
    const auto role = f.str("role");
    ChatMessage m;
    if (role == "user") m.role = Role::User;
    else if (role == "assistant") m.role = Role::Assistant;
    else f.fail("unknown role '" + role + "'");
    m.content = f.str("content");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

DatasetError::DatasetError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string_view format_name(DatasetFormat f) noexcept { return kFormatNames[static_cast<std::size_t>(f)]; }

std::optional<DatasetFormat> parse_format(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kFormatNames.size(); ++i)
    if (kFormatNames[i] == s) return static_cast<DatasetFormat>(i);
  return std::nullopt;
}

DatasetFormat format_of(const Dataset& d) noexcept { return static_cast<DatasetFormat>(d.index()); }

std::size_t dataset_size(const Dataset& d) noexcept {
  return std::visit([](const auto& v) { return v.size(); }, d);
}

std::string to_jsonl(const Dataset& d) {
  std::string out;
  std::visit(
      [&](const auto& records) {
        for (const auto& r : records) out += record_json(r).dump() + "\n";
      },
      d);
  return out;
}

void write_dataset(const Dataset& d, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << to_jsonl(d);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

Dataset parse_dataset(std::string_view text, DatasetFormat format) {
  std::vector<SupervisedExample> sft;
  std::vector<PreferenceRecord> dpo;
  std::vector<DialoguePreference> dialog;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    if (raw.empty()) throw DatasetError(line, "empty line");
    auto j = nlohmann::json::parse(raw, nullptr, false);
    if (j.is_discarded()) throw DatasetError(line, "not a JSON document");
    Fields f(j, line, "record");
    switch (format) {
      case DatasetFormat::Sft:
        f.allow_only({"prompt", "completion", "meta"});
        sft.push_back({f.str("prompt"), f.str("completion"), parse_meta(f.at("meta"), line)});
        break;
      case DatasetFormat::Dpo:
        f.allow_only({"prompt", "chosen", "rejected", "meta"});
        dpo.push_back({f.str("prompt"), f.str("chosen"), f.str("rejected"), parse_meta(f.at("meta"), line)});
        break;
      case DatasetFormat::DpoDialogue:
        f.allow_only({"messages_prefix", "chosen_messages", "rejected_messages", "meta"});
        dialog.push_back({parse_messages(f.at("messages_prefix"), "messages_prefix", line),
                          parse_messages(f.at("chosen_messages"), "chosen_messages", line),
                          parse_messages(f.at("rejected_messages"), "rejected_messages", line),
                          parse_meta(f.at("meta"), line)});
        break;
    }
  }
  switch (format) {
    case DatasetFormat::Sft: return sft;
    case DatasetFormat::Dpo: return dpo;
    case DatasetFormat::DpoDialogue: return dialog;
  }
  return sft;
}

Dataset read_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset(ss.str(), format);
}

}  // namespace causalqa
