#include "causalqa/diagnostics.hpp"

#include <algorithm>
#include <tuple>

namespace causalqa {

std::string_view kind_name(DiagKind kind) noexcept {
  switch (kind) {
    case DiagKind::Lexical: return "lexical error";
    case DiagKind::Syntax: return "syntax error";
    case DiagKind::Reference: return "reference error";
    case DiagKind::Type: return "type error";
    case DiagKind::Definition: return "definition error";
  }
  return "error";
}

std::string format_diagnostics(std::span<const Diagnostic> diags, std::string_view file) {
  std::vector<const Diagnostic*> order;
  order.reserve(diags.size());
  for (const auto& d : diags) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(), [](const Diagnostic* a, const Diagnostic* b) {
    return std::tie(a->span.line, a->span.column, a->message) <
           std::tie(b->span.line, b->span.column, b->message);
  });
  std::string out;
  for (const Diagnostic* d : order) {
    out += file;
    out += ':';
    out += std::to_string(d->span.line);
    out += ':';
    out += std::to_string(d->span.column);
    out += ": ";
    out += d->message;
    out += '\n';
  }
  return out;
}

namespace {
std::string summarize(const std::vector<Diagnostic>& diags, std::string_view file) {
  if (diags.empty()) return "invalid model";
  std::string text = format_diagnostics(diags, file);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}
}  // namespace

ModelError::ModelError(std::vector<Diagnostic> diags, std::string_view file)
    : std::runtime_error(summarize(diags, file)), diags_(std::move(diags)) {}

ModelError::ModelError(const std::string& message)
    : std::runtime_error(message), diags_{{DiagKind::Definition, {}, message}} {}

}  // namespace causalqa
