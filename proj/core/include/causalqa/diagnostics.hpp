#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causalqa {

/// 1-based position of a construct in a world file.  A zero line means the
/// construct was built programmatically.
struct SourceSpan {
  int line = 0;
  int column = 0;
  int length = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class DiagKind { Lexical, Syntax, Reference, Type, Definition };

std::string_view kind_name(DiagKind kind) noexcept;

struct Diagnostic {
  DiagKind kind = DiagKind::Definition;
  SourceSpan span;
  std::string message;
};

/// One line per diagnostic, "file:line:col: message", ordered by span and
/// then message.  An empty list renders as an empty string.
std::string format_diagnostics(std::span<const Diagnostic> diags, std::string_view file);

/// A world or model definition is invalid.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(std::vector<Diagnostic> diags, std::string_view file = "<model>");
  explicit ModelError(const std::string& message);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// The caller asked for something the model does not support (undeclared
/// edge, duplicate intervention, missing template, unavailable mode).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation of a well-typed model failed at runtime (division by zero,
/// unresolved case arm).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace causalqa
