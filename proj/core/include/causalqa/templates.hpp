#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "causalqa/diagnostics.hpp"

namespace causalqa {

/// Piece of a question template.  `{name}` substitutes a value, `{name|a|b}`
/// picks `a` when boolean `name` holds and `b` otherwise, and `{cf_question}`
/// splices in the effect's counterfactual question fragment.
struct Segment {
  enum class Kind { Text, Value, Choice, CfQuestion };
  Kind kind = Kind::Text;
  std::string text;
  std::string name;
  std::string if_true;
  std::string if_false;
  int offset = 0;  // byte offset of the segment within the template source
};

struct Template {
  std::string source;
  std::vector<Segment> segments;
  SourceSpan span;

  bool has_cf_slot() const;
  /// Names referenced by Value and Choice segments.
  std::vector<std::string> names() const;
};

inline constexpr std::string_view kCfSlot = "cf_question";

/// Splits `source` into segments; malformed braces produce Syntax diagnostics
/// positioned relative to `span` (the string literal's opening quote).
Template parse_template(std::string source, SourceSpan span, std::vector<Diagnostic>& diags);

/// Question and answer phrasing for one effect.
struct EffectPhrases {
  std::string effect;
  Template question;     // factual question, e.g. "Is Dave happy? ..."
  Template cf_question;  // fragment placed after an intervention clause
  Template yes;          // clause asserting the factual effect
  Template no;           // clause denying the factual effect
  Template cf_yes;       // clause asserting the counterfactual effect
  Template cf_no;        // clause denying the counterfactual effect
  SourceSpan span;
};

inline constexpr std::string_view kAnyEffect = "*";

struct InterventionTemplate {
  std::string cause;
  bool forced = false;
  std::string effect;  // or kAnyEffect
  Template text;
  SourceSpan span;
};

struct TemplateSet {
  Template context;
  std::vector<EffectPhrases> effects;
  std::vector<InterventionTemplate> interventions;

  const EffectPhrases* effect(std::string_view name) const;
  /// Exact (cause, forced, effect) key first, then the wildcard effect.
  const InterventionTemplate* intervention(std::string_view cause, bool forced, std::string_view effect) const;
};

}  // namespace causalqa
