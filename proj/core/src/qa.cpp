#include "causalqa/qa.hpp"

#include <array>
#include <cctype>
#include <vector>

#include "causalqa/assets.hpp"

namespace causalqa {

std::string_view role_name(Role r) noexcept { return r == Role::User ? "user" : "assistant"; }

std::string_view kind_name(QuestionKind k) noexcept {
  return k == QuestionKind::Factual ? "factual" : "counterfactual";
}

namespace {

struct RenderEnv {
  const CausalModel& model;
  const Context& ctx;
  const Assignment& factual;
  const std::string* cf_fragment;
};

std::string render_template(const Template& t, const RenderEnv& env, std::string_view where) {
  std::string out;
  for (const auto& s : t.segments) {
    switch (s.kind) {
      case Segment::Kind::Text:
        out += s.text;
        break;
      case Segment::Kind::CfQuestion:
        if (!env.cf_fragment) throw UsageError("unresolved placeholder '{cf_question}' in " + std::string(where));
        out += *env.cf_fragment;
        break;
      case Segment::Kind::Value:
      case Segment::Kind::Choice: {
        const Value* v = nullptr;
        int decimals = -1;
        if (auto i = env.model.exo_index(s.name)) {
          v = &env.ctx.values[*i];
          decimals = env.model.display_decimals(*i);
        } else if (auto j = env.model.endo_index(s.name)) {
          v = &env.factual.values[*j];
        }
        if (!v) throw UsageError("unresolved placeholder '{" + s.name + "}' in " + std::string(where));
        if (s.kind == Segment::Kind::Value) {
          out += render_value(*v, decimals);
        } else {
          if (v->index() != 0) throw UsageError("placeholder '{" + s.name + "|...}' is not boolean");
          out += std::get<bool>(*v) ? s.if_true : s.if_false;
        }
        break;
      }
    }
  }
  return out;
}

const EffectPhrases& phrases(const World& w, std::string_view effect) {
  const EffectPhrases* p = w.templates.effect(effect);
  if (!p) throw UsageError("world " + w.name() + " has no question template for '" + std::string(effect) + "'");
  return *p;
}

}  // namespace

RenderedQuestion render_factual(const World& world, const Context& ctx, std::string_view effect) {
  check_context(world.model, ctx);
  const auto& p = phrases(world, effect);
  const Assignment factual = evaluate(world.model, ctx);
  const RenderEnv env{world.model, ctx, factual, nullptr};
  RenderedQuestion q;
  q.kind = QuestionKind::Factual;
  q.context_id = ctx.id;
  q.effect = std::string(effect);
  q.body = render_template(p.question, env, "question for " + q.effect);
  q.text = render_template(world.templates.context, env, "context") + " " + q.body;
  q.yes_clause = render_template(p.yes, env, "answer clause");
  q.no_clause = render_template(p.no, env, "answer clause");
  return q;
}

RenderedQuestion render_interventional(const World& world, const Context& ctx, std::string_view cause, bool forced,
                                       std::string_view effect) {
  check_context(world.model, ctx);
  const auto& p = phrases(world, effect);
  const InterventionTemplate* t = world.templates.intervention(cause, forced, effect);
  if (!t)
    throw UsageError("world " + world.name() + " has no intervention template for " + std::string(cause) + "=" +
                     (forced ? "true" : "false") + " about " + std::string(effect));
  const Assignment factual = evaluate(world.model, ctx);
  RenderEnv env{world.model, ctx, factual, nullptr};
  const std::string fragment = render_template(p.cf_question, env, "counterfactual fragment");
  env.cf_fragment = &fragment;
  RenderedQuestion q;
  q.kind = QuestionKind::Interventional;
  q.context_id = ctx.id;
  q.cause = std::string(cause);
  q.forced = forced;
  q.effect = std::string(effect);
  q.body = render_template(t->text, env, "intervention template");
  q.text = render_template(world.templates.context, env, "context") + " " + q.body;
  q.yes_clause = render_template(p.cf_yes, env, "answer clause");
  q.no_clause = render_template(p.cf_no, env, "answer clause");
  return q;
}

std::pair<RenderedQuestion, RenderedQuestion> render_unit(const World& world, const Context& ctx, const Edge& edge) {
  const UnitOutcome u = potential_outcomes(world.model, ctx, edge);
  RenderedQuestion f = render_factual(world, ctx, edge.effect);
  RenderedQuestion cf = render_interventional(world, ctx, edge.cause, !u.x, edge.effect);
  f.provenance = Provenance{u, u.y};
  cf.provenance = Provenance{u, u.y_cf};
  return {std::move(f), std::move(cf)};
}

// --- extraction ----------------------------------------------------------

namespace {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    // Contracted negations ("isn't", "wouldn't") read as "not".
    if (cur.size() > 3 && cur.compare(cur.size() - 3, 3, "n't") == 0) cur = "not";
    out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    const unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '\'') {
      cur += static_cast<char>(std::tolower(uc));
    } else {
      flush();
    }
  }
  flush();
  for (auto& w : out) {
    while (!w.empty() && w.front() == '\'') w.erase(w.begin());
    while (!w.empty() && w.back() == '\'') w.pop_back();
  }
  std::erase_if(out, [](const std::string& w) { return w.empty(); });
  return out;
}

struct Phrase {
  std::array<std::string_view, 4> words;
  std::size_t size;
  bool positive;
};

constexpr Phrase kLexicon[] = {
    {{"yes"}, 1, true},
    {{"it", "holds"}, 2, true},
    {{"correct"}, 1, true},
    {{"true"}, 1, true},
    {{"no"}, 1, false},
    {{"it", "does", "not", "hold"}, 4, false},
    {{"incorrect"}, 1, false},
    {{"false"}, 1, false},
    {{"not"}, 1, false},
};

}  // namespace

std::optional<BinaryAnswer> extract_rule(std::string_view answer) {
  const auto w = words(answer);
  if (w.empty()) return std::nullopt;
  if (w.front() == "yes") return BinaryAnswer{true, AnswerSource::Rule};
  if (w.front() == "no") return BinaryAnswer{false, AnswerSource::Rule};
  bool pos = false, neg = false;
  std::size_t i = 0;
  while (i < w.size()) {
    const Phrase* best = nullptr;
    for (const auto& p : kLexicon) {
      if (p.size > w.size() - i) continue;
      bool match = true;
      for (std::size_t k = 0; k < p.size && match; ++k) match = w[i + k] == p.words[k];
      if (match && (!best || p.size > best->size)) best = &p;
    }
    if (best) {
      (best->positive ? pos : neg) = true;
      i += best->size;
    } else {
      ++i;
    }
  }
  if (pos == neg) return std::nullopt;
  return BinaryAnswer{pos, AnswerSource::Rule};
}

std::string_view extractor_prompt_template() {
  static const std::string_view t = *assets::find("extractor_v1.txt");
  return t;
}

std::string_view generator_prompt_template() {
  static const std::string_view t = *assets::find("generator_v1.txt");
  return t;
}

namespace {
std::string substitute(std::string_view tmpl, std::string_view key, std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto hit = tmpl.find(key, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(value);
    pos = hit + key.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}
}  // namespace

std::string extractor_prompt(std::string_view question, std::string_view answer) {
  // Substitute {a} first so braces inside the question text survive.
  return substitute(substitute(extractor_prompt_template(), "{a}", answer), "{q}", question);
}

std::string generator_prompt(std::string_view question, bool truth) {
  return substitute(substitute(generator_prompt_template(), "{No/Yes}", truth ? "Yes" : "No"), "{q}", question);
}

BinaryAnswer extract_remote(std::string_view answer, std::string_view question, ChatClient& client) {
  const std::string reply =
      client.complete({{Role::User, extractor_prompt(question, answer)}}, Sampling{0.0, 4});
  std::string token;
  for (char c : reply)
    if (std::isalpha(static_cast<unsigned char>(c))) token += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (token == "POSITIVE") return {true, AnswerSource::Remote};
  if (token == "NEGATIVE") return {false, AnswerSource::Remote};
  throw ExtractionError("extractor reply is neither POSITIVE nor NEGATIVE: '" + reply + "'");
}

std::string generate_answer(const RenderedQuestion& q, bool truth) {
  return truth ? "Yes, " + q.yes_clause + "." : "No, " + q.no_clause + ".";
}

std::string generate_answer_remote(const RenderedQuestion& q, bool truth, ChatClient& client, int attempts) {
  const std::string prompt = generator_prompt(q.text, truth);
  std::string last;
  for (int i = 0; i < attempts; ++i) {
    last = client.complete({{Role::User, prompt}}, Sampling{});
    auto h = extract_rule(last);
    if (h && h->value == truth) return last;
  }
  throw GenerationError("generated answer does not re-extract to " + std::string(truth ? "positive" : "negative") +
                        " after " + std::to_string(attempts) + " attempts: '" + last + "'");
}

}  // namespace causalqa
