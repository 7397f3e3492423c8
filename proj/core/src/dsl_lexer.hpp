#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "causalqa/diagnostics.hpp"

namespace causalqa::dsl {

enum class Tok { Ident, Int, Real, String, Punct, Newline, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, decoded string, number text or punctuation
  SourceSpan span;

  bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
  bool punct(std::string_view t) const { return is(Tok::Punct, t); }
  bool word(std::string_view t) const { return is(Tok::Ident, t); }
};

/// Splits a world file into tokens.  Physical lines that start with
/// whitespace continue the previous logical line; every logical line ends in
/// a Newline token and the stream ends with End.
std::vector<Token> lex(std::string_view source, std::vector<Diagnostic>& diags);

}  // namespace causalqa::dsl
