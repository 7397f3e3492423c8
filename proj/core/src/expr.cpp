#include "causalqa/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace causalqa {

std::string_view op_symbol(Op op) noexcept {
  switch (op) {
    case Op::Neg: return "-";
    case Op::Not: return "not";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "and";
    case Op::Or: return "or";
    default: return "";
  }
}

bool is_comparison(Op op) noexcept { return op >= Op::Eq && op <= Op::Ge; }

Expr Expr::lit(Value v, SourceSpan span) {
  Expr e;
  e.op = Op::Literal;
  e.literal = std::move(v);
  e.span = span;
  return e;
}

Expr Expr::ref(std::string name, SourceSpan span) {
  Expr e;
  e.op = Op::Ref;
  e.name = std::move(name);
  e.span = span;
  return e;
}

Expr Expr::unary(Op op, Expr operand, SourceSpan span) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(operand));
  e.span = span;
  return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs, SourceSpan span) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  e.span = span;
  return e;
}

namespace {

void type_error(std::vector<Diagnostic>& diags, const Expr& e, std::string msg) {
  diags.push_back({DiagKind::Type, e.span, "type error: " + std::move(msg)});
}

std::string describe(const Expr& e) {
  if (e.op == Op::Ref) return "'" + e.name + "'";
  if (e.op == Op::Literal) return render_value(e.literal);
  return "operand";
}

}  // namespace

std::optional<ValueType> infer_type(const Expr& e, const TypeLookup& lookup,
                                    std::vector<Diagnostic>& diags) {
  switch (e.op) {
    case Op::Literal:
      return type_of(e.literal);
    case Op::Ref: {
      auto t = lookup(e.name);
      if (!t) diags.push_back({DiagKind::Reference, e.span, "reference error: undeclared name '" + e.name + "'"});
      return t;
    }
    default:
      break;
  }

  std::vector<std::optional<ValueType>> t;
  for (const auto& a : e.args) t.push_back(infer_type(a, lookup, diags));
  if (std::any_of(t.begin(), t.end(), [](const auto& x) { return !x.has_value(); }))
    return std::nullopt;

  const std::string sym(op_symbol(e.op));
  switch (e.op) {
    case Op::Not:
      if (*t[0] != ValueType::Bool) {
        type_error(diags, e, "'not' needs a boolean operand, got " + std::string(type_name(*t[0])));
        return std::nullopt;
      }
      return ValueType::Bool;
    case Op::Neg:
      if (*t[0] == ValueType::Label) {
        type_error(diags, e, "cannot negate a label");
        return std::nullopt;
      }
      return *t[0] == ValueType::Real ? ValueType::Real : ValueType::Int;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      for (std::size_t i = 0; i < 2; ++i) {
        if (*t[i] == ValueType::Label) {
          type_error(diags, e.args[i], "label " + describe(e.args[i]) + " used in arithmetic '" + sym + "'");
          return std::nullopt;
        }
      }
      if (e.op == Op::Div || *t[0] == ValueType::Real || *t[1] == ValueType::Real) return ValueType::Real;
      return ValueType::Int;
    case Op::And:
    case Op::Or:
      for (std::size_t i = 0; i < 2; ++i) {
        if (*t[i] != ValueType::Bool) {
          type_error(diags, e.args[i], "'" + sym + "' needs boolean operands, got " +
                                           std::string(type_name(*t[i])) + " " + describe(e.args[i]));
          return std::nullopt;
        }
      }
      return ValueType::Bool;
    default: {
      const bool eq = e.op == Op::Eq || e.op == Op::Ne;
      const ValueType a = *t[0], b = *t[1];
      const bool a_num = a == ValueType::Int || a == ValueType::Real;
      const bool b_num = b == ValueType::Int || b == ValueType::Real;
      bool ok;
      if (eq)
        ok = (a_num && b_num) || (a == b && !a_num);
      else
        ok = a_num && b_num;
      if (!ok) {
        type_error(diags, e, "cannot compare " + std::string(type_name(a)) + " " + describe(e.args[0]) +
                                 " with " + std::string(type_name(b)) + " " + describe(e.args[1]) +
                                 " using '" + sym + "'");
        return std::nullopt;
      }
      return ValueType::Bool;
    }
  }
}

namespace {

bool truthy(const Value& v) { return std::get<bool>(v); }

bool both_integral(const Value& a, const Value& b) {
  return a.index() != 2 && b.index() != 2;
}

std::int64_t as_int(const Value& v) {
  return v.index() == 0 ? (std::get<bool>(v) ? 1 : 0) : std::get<std::int64_t>(v);
}

template <class Cmp>
bool compare(const Value& a, const Value& b, Cmp cmp) {
  if (both_integral(a, b)) return cmp(as_int(a), as_int(b));
  return cmp(as_number(a), as_number(b));
}

}  // namespace

Value eval(const Expr& e, std::span<const Value> env) {
  switch (e.op) {
    case Op::Literal:
      return e.literal;
    case Op::Ref:
      return env[static_cast<std::size_t>(e.slot)];
    case Op::Not:
      return !truthy(eval(e.args[0], env));
    case Op::Neg: {
      Value v = eval(e.args[0], env);
      if (v.index() == 2) return -std::get<double>(v);
      return -as_int(v);
    }
    case Op::And:
      return truthy(eval(e.args[0], env)) && truthy(eval(e.args[1], env));
    case Op::Or:
      return truthy(eval(e.args[0], env)) || truthy(eval(e.args[1], env));
    default:
      break;
  }
  const Value a = eval(e.args[0], env);
  const Value b = eval(e.args[1], env);
  switch (e.op) {
    case Op::Add:
      if (both_integral(a, b)) return as_int(a) + as_int(b);
      return as_number(a) + as_number(b);
    case Op::Sub:
      if (both_integral(a, b)) return as_int(a) - as_int(b);
      return as_number(a) - as_number(b);
    case Op::Mul:
      if (both_integral(a, b)) return as_int(a) * as_int(b);
      return as_number(a) * as_number(b);
    case Op::Div: {
      const double d = as_number(b);
      if (d == 0.0) throw EvalError("division by zero in '" + to_source(e) + "'");
      return as_number(a) / d;
    }
    case Op::Eq:
      if (a.index() == 3 || b.index() == 3 || (a.index() == 0 && b.index() == 0)) return a == b;
      return compare(a, b, std::equal_to<>{});
    case Op::Ne:
      if (a.index() == 3 || b.index() == 3 || (a.index() == 0 && b.index() == 0)) return a != b;
      return compare(a, b, std::not_equal_to<>{});
    case Op::Lt: return compare(a, b, std::less<>{});
    case Op::Le: return compare(a, b, std::less_equal<>{});
    case Op::Gt: return compare(a, b, std::greater<>{});
    case Op::Ge: return compare(a, b, std::greater_equal<>{});
    default:
      throw EvalError("malformed expression");
  }
}

std::vector<std::string> bind_slots(Expr& e, const std::function<int(std::string_view)>& slot_of) {
  std::vector<std::string> missing;
  if (e.op == Op::Ref) {
    e.slot = slot_of(e.name);
    if (e.slot < 0) missing.push_back(e.name);
  }
  for (auto& a : e.args) {
    auto m = bind_slots(a, slot_of);
    missing.insert(missing.end(), m.begin(), m.end());
  }
  return missing;
}

namespace {
void collect(const Expr& e, std::vector<std::string>& out) {
  if (e.op == Op::Ref && std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
  for (const auto& a : e.args) collect(a, out);
}

int precedence(const Expr& e) {
  switch (e.op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 3;
    case Op::Add: case Op::Sub: return 4;
    case Op::Mul: case Op::Div: return 5;
    case Op::Not: case Op::Neg: return 6;
    case Op::Literal:
      // A negative numeric literal prints with a leading '-', like a unary minus.
      if ((e.literal.index() == 1 && std::get<std::int64_t>(e.literal) < 0) ||
          (e.literal.index() == 2 && std::signbit(std::get<double>(e.literal))))
        return 6;
      return 7;
    default: return 7;
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string wrap(const Expr& e, bool parens) {
  std::string s = to_source(e);
  return parens ? "(" + s + ")" : s;
}
}  // namespace

std::vector<std::string> referenced_names(const Expr& e) {
  std::vector<std::string> out;
  collect(e, out);
  return out;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos) s += ".0";
  return s;
}

std::string to_source(const Expr& e) {
  switch (e.op) {
    case Op::Literal:
      switch (e.literal.index()) {
        case 0: return std::get<bool>(e.literal) ? "true" : "false";
        case 1: return std::to_string(std::get<std::int64_t>(e.literal));
        case 2: return format_real(std::get<double>(e.literal));
        default: return quote(std::get<std::string>(e.literal));
      }
    case Op::Ref:
      return e.name;
    case Op::Not:
      return "not " + wrap(e.args[0], precedence(e.args[0]) < 6);
    case Op::Neg:
      // Parenthesize negative literals and nested negation so "--" never appears.
      return "-" + wrap(e.args[0], precedence(e.args[0]) <= 6);
    default:
      break;
  }
  const int p = precedence(e);
  const bool cmp = is_comparison(e.op);
  const bool lp = cmp ? precedence(e.args[0]) <= p : precedence(e.args[0]) < p;
  const bool rp = precedence(e.args[1]) <= p;
  return wrap(e.args[0], lp) + " " + std::string(op_symbol(e.op)) + " " + wrap(e.args[1], rp);
}

}  // namespace causalqa
