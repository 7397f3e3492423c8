#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/diagnostics.hpp"
#include "causalqa/value.hpp"

namespace causalqa {

enum class Op : std::uint8_t {
  Literal, Ref,
  Neg, Not,
  Add, Sub, Mul, Div,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or,
};

std::string_view op_symbol(Op op) noexcept;
bool is_comparison(Op op) noexcept;

/// Expression tree.  References carry the variable name and, after a model is
/// compiled, the slot of that variable in the evaluation environment.
struct Expr {
  Op op = Op::Literal;
  Value literal{false};
  std::string name;
  int slot = -1;
  std::vector<Expr> args;
  SourceSpan span;

  static Expr lit(Value v, SourceSpan span = {});
  static Expr ref(std::string name, SourceSpan span = {});
  static Expr unary(Op op, Expr operand, SourceSpan span = {});
  static Expr binary(Op op, Expr lhs, Expr rhs, SourceSpan span = {});
};

/// Type of a variable by name, or nullopt if the name is unknown.
using TypeLookup = std::function<std::optional<ValueType>(std::string_view)>;

/// Infers the result type, appending a Type (or Reference) diagnostic for each
/// offending node.  Booleans act as 0/1 in arithmetic; `/` always yields a
/// real; ordering comparisons need numbers; a boolean is never compared with
/// a number.
std::optional<ValueType> infer_type(const Expr& e, const TypeLookup& lookup,
                                    std::vector<Diagnostic>& diags);

/// Evaluates an expression whose references have been bound to slots.
/// Throws EvalError on division by zero.
Value eval(const Expr& e, std::span<const Value> env);

/// Binds every reference to a slot; returns the names that could not be bound.
std::vector<std::string> bind_slots(Expr& e, const std::function<int(std::string_view)>& slot_of);

/// Names referenced anywhere in `e`, in first-occurrence order, each once.
std::vector<std::string> referenced_names(const Expr& e);

/// Canonical source text with the minimum parentheses needed to reparse to
/// the same tree shape.
std::string to_source(const Expr& e);

/// Shortest round-tripping decimal text of a real, always containing a '.'.
std::string format_real(double v);

}  // namespace causalqa
