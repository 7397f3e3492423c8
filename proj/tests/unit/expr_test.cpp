#include <gtest/gtest.h>

#include <cmath>

#include "causalqa/diagnostics.hpp"
#include "causalqa/dsl.hpp"
#include "causalqa/expr.hpp"
#include "support.hpp"

using namespace causalqa;

namespace {

Expr num(std::int64_t v) { return Expr::lit(Value(v)); }
Expr real(double v) { return Expr::lit(Value(v)); }
Expr b(bool v) { return Expr::lit(Value(v)); }

Value run(const Expr& e) { return eval(e, {}); }

std::optional<ValueType> type_with(const Expr& e, std::vector<Diagnostic>& d) {
  return infer_type(e, [](std::string_view) { return std::optional<ValueType>{}; }, d);
}

// Random integer/boolean expression over slots 0 (int a), 1 (int b), 2 (bool p).
Expr gen_num(Rng& r, int depth);
Expr gen_bool(Rng& r, int depth);

Expr leaf_num(Rng& r) {
  switch (r.uniform_int(0, 2)) {
    case 0: return Expr::ref("a");
    case 1: return Expr::ref("b");
    default: return num(r.uniform_int(-5, 9));
  }
}

Expr gen_num(Rng& r, int depth) {
  if (depth == 0 || r.bernoulli(0.3)) return leaf_num(r);
  static const Op ops[] = {Op::Add, Op::Sub, Op::Mul};
  if (r.bernoulli(0.15)) return Expr::unary(Op::Neg, gen_num(r, depth - 1));
  return Expr::binary(ops[r.uniform_int(0, 2)], gen_num(r, depth - 1), gen_num(r, depth - 1));
}

Expr gen_bool(Rng& r, int depth) {
  if (depth == 0 || r.bernoulli(0.2)) return r.bernoulli(0.5) ? Expr::ref("p") : b(r.bernoulli(0.5));
  switch (r.uniform_int(0, 3)) {
    case 0: return Expr::unary(Op::Not, gen_bool(r, depth - 1));
    case 1: return Expr::binary(Op::And, gen_bool(r, depth - 1), gen_bool(r, depth - 1));
    case 2: return Expr::binary(Op::Or, gen_bool(r, depth - 1), gen_bool(r, depth - 1));
    default: {
      static const Op cmp[] = {Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge};
      return Expr::binary(cmp[r.uniform_int(0, 5)], gen_num(r, depth - 1), gen_num(r, depth - 1));
    }
  }
}

// Direct evaluator over the same tree, written independently of eval().
std::int64_t ref_num(const Expr& e, std::int64_t a, std::int64_t bv);
bool ref_bool(const Expr& e, std::int64_t a, std::int64_t bv, bool p) {
  switch (e.op) {
    case Op::Literal: return std::get<bool>(e.literal);
    case Op::Ref: return p;
    case Op::Not: return !ref_bool(e.args[0], a, bv, p);
    case Op::And: return ref_bool(e.args[0], a, bv, p) && ref_bool(e.args[1], a, bv, p);
    case Op::Or: return ref_bool(e.args[0], a, bv, p) || ref_bool(e.args[1], a, bv, p);
    default: break;
  }
  const auto l = ref_num(e.args[0], a, bv), r = ref_num(e.args[1], a, bv);
  switch (e.op) {
    case Op::Eq: return l == r;
    case Op::Ne: return l != r;
    case Op::Lt: return l < r;
    case Op::Le: return l <= r;
    case Op::Gt: return l > r;
    default: return l >= r;
  }
}
std::int64_t ref_num(const Expr& e, std::int64_t a, std::int64_t bv) {
  switch (e.op) {
    case Op::Literal: return std::get<std::int64_t>(e.literal);
    case Op::Ref: return e.name == "a" ? a : bv;
    case Op::Neg: return -ref_num(e.args[0], a, bv);
    case Op::Add: return ref_num(e.args[0], a, bv) + ref_num(e.args[1], a, bv);
    case Op::Sub: return ref_num(e.args[0], a, bv) - ref_num(e.args[1], a, bv);
    default: return ref_num(e.args[0], a, bv) * ref_num(e.args[1], a, bv);
  }
}

int slot_of(std::string_view n) { return n == "a" ? 0 : n == "b" ? 1 : 2; }

}  // namespace

TEST(Expr, ArithmeticPromotion) {
  EXPECT_EQ(run(Expr::binary(Op::Add, num(2), num(3))), Value(std::int64_t{5}));
  EXPECT_EQ(run(Expr::binary(Op::Div, num(7), num(2))), Value(3.5));
  EXPECT_EQ(run(Expr::binary(Op::Mul, num(2), real(1.5))), Value(3.0));
}

TEST(Expr, BoolCountsAsZeroOneInArithmetic) {
  EXPECT_EQ(as_number(run(Expr::binary(Op::Mul, num(10), b(true)))), 10.0);
  EXPECT_EQ(as_number(run(Expr::binary(Op::Sub, num(1), b(false)))), 1.0);
}

TEST(Expr, DivisionByZeroThrows) {
  EXPECT_THROW(run(Expr::binary(Op::Div, num(1), num(0))), EvalError);
}

TEST(Expr, ShortCircuitLogic) {
  // The right operand would divide by zero if evaluated.
  const Expr boom = Expr::binary(Op::Gt, Expr::binary(Op::Div, num(1), num(0)), num(0));
  EXPECT_EQ(run(Expr::binary(Op::And, b(false), boom)), Value(false));
  EXPECT_EQ(run(Expr::binary(Op::Or, b(true), boom)), Value(true));
}

TEST(Expr, ComparingBoolWithNumberIsTypeError) {
  std::vector<Diagnostic> d;
  EXPECT_FALSE(type_with(Expr::binary(Op::Eq, b(true), num(1)), d).has_value());
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].kind, DiagKind::Type);
}

TEST(Expr, OrderingNeedsNumbers) {
  std::vector<Diagnostic> d;
  EXPECT_FALSE(type_with(Expr::binary(Op::Lt, b(true), b(false)), d).has_value());
  EXPECT_FALSE(d.empty());
}

TEST(Expr, LogicNeedsBooleans) {
  std::vector<Diagnostic> d;
  EXPECT_FALSE(type_with(Expr::binary(Op::And, num(1), b(true)), d).has_value());
  EXPECT_FALSE(d.empty());
}

TEST(Expr, DivisionYieldsReal) {
  std::vector<Diagnostic> d;
  EXPECT_EQ(type_with(Expr::binary(Op::Div, num(4), num(2)), d), ValueType::Real);
}

TEST(Expr, FormatRealKeepsPoint) {
  EXPECT_EQ(format_real(2.0), "2.0");
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(-1.25), "-1.25");
}

TEST(Expr, ToSourceUsesMinimalParentheses) {
  const Expr e = Expr::binary(Op::Mul, Expr::binary(Op::Add, Expr::ref("a"), num(1)), Expr::ref("b"));
  EXPECT_EQ(to_source(e), "(a + 1) * b");
  const Expr f = Expr::binary(Op::Add, Expr::ref("a"), Expr::binary(Op::Mul, num(2), Expr::ref("b")));
  EXPECT_EQ(to_source(f), "a + 2 * b");
  const Expr g = Expr::binary(Op::Sub, Expr::ref("a"), Expr::binary(Op::Sub, Expr::ref("b"), num(1)));
  EXPECT_EQ(to_source(g), "a - (b - 1)");
}

TEST(ExprProperty, EvalMatchesReferenceInterpreter) {
  for (int t = 0; t < testsupport::kTrials; ++t) {
    auto r = testsupport::trial_rng(10, t);
    Expr e = gen_bool(r, 4);
    bind_slots(e, slot_of);
    for (int k = 0; k < 5; ++k) {
      const std::int64_t a = r.uniform_int(-10, 10), bv = r.uniform_int(-10, 10);
      const bool p = r.bernoulli(0.5);
      const std::vector<Value> env{Value(a), Value(bv), Value(p)};
      ASSERT_EQ(eval(e, env), Value(ref_bool(e, a, bv, p))) << to_source(e);
    }
  }
}

TEST(ExprProperty, SourceRoundTripThroughWorldParser) {
  for (int t = 0; t < 100; ++t) {
    auto r = testsupport::trial_rng(11, t);
    const Expr e = gen_bool(r, 4);
    const std::string src = to_source(e);
    const std::string world =
        "world t\nexo a ~ uniform_int(-10, 10)\nexo b ~ uniform_int(-10, 10)\nexo p ~ bernoulli(1/2)\n"
        "var V = " + src + "\n";
    auto parsed = parse(world);
    ASSERT_TRUE(parsed.ok()) << src << "\n" << format_diagnostics(parsed.diagnostics, "t");
    Expr back = parsed.file->model.endogenous.at(0).equation;
    EXPECT_EQ(to_source(back), src);
    Expr bound = e;
    bind_slots(bound, slot_of);
    bind_slots(back, slot_of);
    for (int k = 0; k < 5; ++k) {
      const std::vector<Value> env{Value(r.uniform_int(-10, 10)), Value(r.uniform_int(-10, 10)),
                                   Value(r.bernoulli(0.5))};
      ASSERT_EQ(eval(bound, env), eval(back, env)) << src;
    }
  }
}
