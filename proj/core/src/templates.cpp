#include "causalqa/templates.hpp"

#include <algorithm>
#include <cctype>

namespace causalqa {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

bool Template::has_cf_slot() const {
  return std::any_of(segments.begin(), segments.end(),
                     [](const Segment& s) { return s.kind == Segment::Kind::CfQuestion; });
}

std::vector<std::string> Template::names() const {
  std::vector<std::string> out;
  for (const auto& s : segments)
    if (s.kind == Segment::Kind::Value || s.kind == Segment::Kind::Choice) out.push_back(s.name);
  return out;
}

Template parse_template(std::string source, SourceSpan span, std::vector<Diagnostic>& diags) {
  Template t;
  t.span = span;
  auto at = [&](std::size_t offset, std::size_t len) {
    return SourceSpan{span.line, span.column + 1 + static_cast<int>(offset), static_cast<int>(len)};
  };
  std::string text;
  std::size_t text_start = 0;
  auto flush = [&](std::size_t next) {
    if (!text.empty()) t.segments.push_back({Segment::Kind::Text, text, {}, {}, {}, static_cast<int>(text_start)});
    text.clear();
    text_start = next;
  };
  std::size_t i = 0;
  while (i < source.size()) {
    const char c = source[i];
    if (c == '}') {
      diags.push_back({DiagKind::Syntax, at(i, 1), "syntax error: unmatched '}' in template"});
      ++i;
      continue;
    }
    if (c != '{') {
      if (text.empty()) text_start = i;
      text += c;
      ++i;
      continue;
    }
    const std::size_t close = source.find('}', i + 1);
    const std::size_t nested = source.find('{', i + 1);
    if (close == std::string::npos || (nested != std::string::npos && nested < close)) {
      diags.push_back({DiagKind::Syntax, at(i, 1), "syntax error: unterminated '{' in template"});
      ++i;
      continue;
    }
    flush(close + 1);
    const std::string body = source.substr(i + 1, close - i - 1);
    Segment seg;
    seg.offset = static_cast<int>(i);
    const auto bar = body.find('|');
    if (bar == std::string::npos) {
      seg.name = body;
      seg.kind = body == kCfSlot ? Segment::Kind::CfQuestion : Segment::Kind::Value;
    } else {
      const auto bar2 = body.find('|', bar + 1);
      if (bar2 == std::string::npos || body.find('|', bar2 + 1) != std::string::npos) {
        diags.push_back({DiagKind::Syntax, at(i, close - i + 1),
                         "syntax error: choice placeholder must be {name|if_true|if_false}"});
        i = close + 1;
        continue;
      }
      seg.kind = Segment::Kind::Choice;
      seg.name = body.substr(0, bar);
      seg.if_true = body.substr(bar + 1, bar2 - bar - 1);
      seg.if_false = body.substr(bar2 + 1);
    }
    if (!is_identifier(seg.name)) {
      diags.push_back({DiagKind::Syntax, at(i, close - i + 1),
                       "syntax error: placeholder '{" + body + "}' does not start with a name"});
    } else {
      t.segments.push_back(std::move(seg));
    }
    i = close + 1;
  }
  flush(source.size());
  t.source = std::move(source);
  return t;
}

const EffectPhrases* TemplateSet::effect(std::string_view name) const {
  for (const auto& e : effects)
    if (e.effect == name) return &e;
  return nullptr;
}

const InterventionTemplate* TemplateSet::intervention(std::string_view cause, bool forced,
                                                      std::string_view effect) const {
  const InterventionTemplate* wildcard = nullptr;
  for (const auto& t : interventions) {
    if (t.cause != cause || t.forced != forced) continue;
    if (t.effect == effect) return &t;
    if (t.effect == kAnyEffect && !wildcard) wildcard = &t;
  }
  return wildcard;
}

}  // namespace causalqa
