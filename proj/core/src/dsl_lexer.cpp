#include "dsl_lexer.hpp"

#include <cctype>

namespace causalqa::dsl {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

void lex_error(std::vector<Diagnostic>& diags, int line, int col, int len, std::string msg) {
  diags.push_back({DiagKind::Lexical, {line, col, len}, "lexical error: " + std::move(msg)});
}

}  // namespace

std::vector<Token> lex(std::string_view source, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  bool line_open = false;  // a logical line has tokens not yet terminated
  int line_no = 0;
  std::size_t pos = 0;

  auto close_line = [&](int line, int col) {
    if (line_open) out.push_back({Tok::Newline, "", {line, col, 0}});
    line_open = false;
  };

  int last_line = 1, last_col = 1;
  while (pos <= source.size()) {
    if (pos == source.size() && line_no > 0) break;
    std::size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    std::string_view line = source.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = eol + 1;

    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size() || line[i] == '#') {
      if (eol == source.size()) break;
      continue;
    }
    if (i == 0) close_line(last_line, last_col);

    while (i < line.size()) {
      const char c = line[i];
      const int col = static_cast<int>(i) + 1;
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '#') break;
      Token t;
      t.span = {line_no, col, 1};
      if (ident_start(c)) {
        std::size_t j = i;
        while (j < line.size() && ident_char(line[j])) ++j;
        t.kind = Tok::Ident;
        t.text = std::string(line.substr(i, j - i));
        i = j;
      } else if (digit(c) || (c == '.' && i + 1 < line.size() && digit(line[i + 1]))) {
        std::size_t j = i;
        while (j < line.size() && digit(line[j])) ++j;
        t.kind = Tok::Int;
        if (j < line.size() && line[j] == '.') {
          ++j;
          if (j >= line.size() || !digit(line[j])) {
            lex_error(diags, line_no, col, static_cast<int>(j - i), "malformed number '" + std::string(line.substr(i, j - i)) + "'");
          }
          while (j < line.size() && digit(line[j])) ++j;
          t.kind = Tok::Real;
        }
        if (j < line.size() && ident_char(line[j])) {
          std::size_t k = j;
          while (k < line.size() && ident_char(line[k])) ++k;
          lex_error(diags, line_no, col, static_cast<int>(k - i), "malformed number '" + std::string(line.substr(i, k - i)) + "'");
          j = k;
        }
        t.text = std::string(line.substr(i, j - i));
        i = j;
      } else if (c == '"') {
        std::size_t j = i + 1;
        std::string text;
        bool closed = false;
        while (j < line.size()) {
          if (line[j] == '"') {
            closed = true;
            ++j;
            break;
          }
          if (line[j] == '\\') {
            if (j + 1 < line.size() && (line[j + 1] == '"' || line[j + 1] == '\\')) {
              text += line[j + 1];
              j += 2;
              continue;
            }
            lex_error(diags, line_no, static_cast<int>(j) + 1, 2, "unknown escape sequence in string");
            ++j;
            continue;
          }
          text += line[j++];
        }
        if (!closed) lex_error(diags, line_no, col, static_cast<int>(line.size() - i), "unterminated string");
        t.kind = Tok::String;
        t.text = std::move(text);
        i = j;
      } else {
        static constexpr std::string_view two[] = {"->", "==", "!=", ">=", "<="};
        static constexpr std::string_view one = "(){},:~=<>+-*/|";
        t.kind = Tok::Punct;
        std::string_view rest = line.substr(i);
        bool matched = false;
        for (auto p : two) {
          if (rest.substr(0, 2) == p) {
            t.text = std::string(p);
            matched = true;
            break;
          }
        }
        if (!matched && one.find(c) != std::string_view::npos) {
          t.text = std::string(1, c);
          matched = true;
        }
        if (!matched) {
          const unsigned char uc = static_cast<unsigned char>(c);
          std::string shown = uc >= 0x20 && uc < 0x7f ? std::string(1, c) : "\\x" + std::to_string(uc);
          lex_error(diags, line_no, col, 1, "unexpected character '" + shown + "'");
          ++i;
          continue;
        }
        i += t.text.size();
      }
      t.span.length = static_cast<int>(i) + 1 - t.span.column;
      out.push_back(std::move(t));
      line_open = true;
      last_line = line_no;
      last_col = static_cast<int>(i) + 1;
    }
    if (eol == source.size()) break;
  }
  close_line(last_line, last_col);
  out.push_back({Tok::End, "", {last_line, last_col, 0}});
  return out;
}

}  // namespace causalqa::dsl
