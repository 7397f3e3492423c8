#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "causalqa/dsl.hpp"
#include "dsl_lexer.hpp"

namespace causalqa {

namespace {

using dsl::Tok;
using dsl::Token;

struct LineAbort {};

const std::set<std::string, std::less<>> kReserved = {"and", "or", "not", "true", "false"};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags) : toks_(std::move(toks)), diags_(diags) {}

  WorldFile run() {
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Newline) {
        ++pos_;
        continue;
      }
      const std::size_t before = diags_.size();
      try {
        declaration();
        if (peek().kind != Tok::Newline && peek().kind != Tok::End)
          fail(peek(), "unexpected " + describe(peek()) + " after declaration");
      } catch (const LineAbort&) {
      }
      (void)before;
      while (peek().kind != Tok::Newline && peek().kind != Tok::End) ++pos_;
    }
    if (!saw_world_) {
      diags_.push_back({DiagKind::Syntax, {1, 1, 0}, "syntax error: missing 'world <name>' declaration"});
    }
    return std::move(wf_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
  WorldFile wf_;
  bool saw_world_ = false;
  bool saw_context_ = false;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (t.kind != Tok::End) ++pos_;
    return t;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::Newline: return "end of line";
      case Tok::End: return "end of file";
      case Tok::String: return "string";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(const Token& at, const std::string& msg) {
    diags_.push_back({DiagKind::Syntax, at.span, "syntax error: " + msg});
    throw LineAbort{};
  }

  const Token& expect_punct(std::string_view p, std::string_view context) {
    if (!peek().punct(p)) fail(peek(), "expected '" + std::string(p) + "' " + std::string(context) + ", got " + describe(peek()));
    return next();
  }

  void expect_word(std::string_view w, std::string_view context) {
    if (!peek().word(w)) fail(peek(), "expected '" + std::string(w) + "' " + std::string(context) + ", got " + describe(peek()));
    next();
  }

  const Token& identifier(std::string_view what) {
    if (peek().kind != Tok::Ident) fail(peek(), "expected " + std::string(what) + ", got " + describe(peek()));
    if (kReserved.count(peek().text)) fail(peek(), "'" + peek().text + "' is a reserved word and cannot name " + std::string(what));
    return next();
  }

  // --- numbers ---------------------------------------------------------

  double number(bool allow_negative, bool* is_int = nullptr) {
    bool neg = false;
    const Token& first = peek();
    if (allow_negative && peek().punct("-")) {
      neg = true;
      next();
    }
    if (peek().kind != Tok::Int && peek().kind != Tok::Real) fail(peek(), "expected a number, got " + describe(peek()));
    (void)first;
    const Token& t = next();
    if (is_int) *is_int = t.kind == Tok::Int;
    double v = 0;
    std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    return neg ? -v : v;
  }

  std::int64_t integer(bool allow_negative) {
    bool neg = false;
    if (allow_negative && peek().punct("-")) {
      neg = true;
      next();
    }
    if (peek().kind != Tok::Int) fail(peek(), "expected an integer, got " + describe(peek()));
    const Token& t = next();
    std::int64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc()) fail(t, "integer out of range");
    return neg ? -v : v;
  }

  Weight weight() {
    Weight w;
    w.num = number(false);
    if (peek().punct("/")) {
      next();
      w.den = number(false);
      if (w.den == 0) fail(toks_[pos_ - 1], "zero denominator");
    }
    return w;
  }

  // --- expressions -----------------------------------------------------

  bool starts_operand(const Token& t) const {
    switch (t.kind) {
      case Tok::Ident:
      case Tok::Int:
      case Tok::Real:
      case Tok::String:
        return true;
      case Tok::Punct:
        return t.text == "(" || t.text == "-";
      default:
        return false;
    }
  }

  void need_operand(const Token& op) {
    if (!starts_operand(peek()) || peek().word("and") || peek().word("or"))
      fail(op, "expected an operand after '" + op.text + "'");
  }

  static SourceSpan join(SourceSpan a, SourceSpan b) {
    if (a.line == b.line && b.column >= a.column) return {a.line, a.column, b.column + b.length - a.column};
    return a;
  }

  Expr expression() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (peek().word("or")) {
      const Token op = next();
      need_operand(op);
      Expr rhs = and_expr();
      const SourceSpan s = join(lhs.span, rhs.span);
      lhs = Expr::binary(Op::Or, std::move(lhs), std::move(rhs), s);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = comparison();
    while (peek().word("and")) {
      const Token op = next();
      need_operand(op);
      Expr rhs = comparison();
      const SourceSpan s = join(lhs.span, rhs.span);
      lhs = Expr::binary(Op::And, std::move(lhs), std::move(rhs), s);
    }
    return lhs;
  }

  static std::optional<Op> comparison_op(const Token& t) {
    if (t.kind != Tok::Punct) return std::nullopt;
    if (t.text == "==") return Op::Eq;
    if (t.text == "!=") return Op::Ne;
    if (t.text == "<") return Op::Lt;
    if (t.text == "<=") return Op::Le;
    if (t.text == ">") return Op::Gt;
    if (t.text == ">=") return Op::Ge;
    return std::nullopt;
  }

  Expr comparison() {
    Expr lhs = additive();
    if (auto op = comparison_op(peek())) {
      const Token tok = next();
      need_operand(tok);
      Expr rhs = additive();
      if (comparison_op(peek())) fail(peek(), "comparison operators do not chain; add parentheses");
      const SourceSpan s = join(lhs.span, rhs.span);
      lhs = Expr::binary(*op, std::move(lhs), std::move(rhs), s);
    } else if (peek().punct("=")) {
      fail(peek(), "'=' is not a comparison; use '=='");
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (peek().punct("+") || peek().punct("-")) {
      const Token op = next();
      need_operand(op);
      Expr rhs = multiplicative();
      const SourceSpan s = join(lhs.span, rhs.span);
      lhs = Expr::binary(op.text == "+" ? Op::Add : Op::Sub, std::move(lhs), std::move(rhs), s);
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (peek().punct("*") || peek().punct("/")) {
      const Token op = next();
      need_operand(op);
      Expr rhs = unary();
      const SourceSpan s = join(lhs.span, rhs.span);
      lhs = Expr::binary(op.text == "*" ? Op::Mul : Op::Div, std::move(lhs), std::move(rhs), s);
    }
    return lhs;
  }

  Expr unary() {
    if (peek().word("not") || peek().punct("-")) {
      const Token op = next();
      need_operand(op);
      Expr operand = unary();
      const SourceSpan s = join(op.span, operand.span);
      return Expr::unary(op.text == "not" ? Op::Not : Op::Neg, std::move(operand), s);
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: {
        next();
        std::int64_t v = 0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec != std::errc()) fail(t, "integer literal out of range");
        return Expr::lit(v, t.span);
      }
      case Tok::Real: {
        next();
        double v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return Expr::lit(v, t.span);
      }
      case Tok::String:
        next();
        return Expr::lit(t.text, t.span);
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          next();
          return Expr::lit(t.text == "true", t.span);
        }
        if (kReserved.count(t.text)) fail(t, "unexpected '" + t.text + "'");
        next();
        return Expr::ref(t.text, t.span);
      case Tok::Punct:
        if (t.text == "(") {
          next();
          Expr inner = expression();
          if (!peek().punct(")")) fail(peek(), "expected ')' to close '(' at column " + std::to_string(t.span.column) + ", got " + describe(peek()));
          next();
          return inner;
        }
        [[fallthrough]];
      default:
        fail(t, "expected an expression, got " + describe(t));
    }
  }

  // --- distributions ---------------------------------------------------

  Distribution distribution() {
    const Token& head = peek();
    if (head.kind != Tok::Ident) fail(head, "expected a distribution, got " + describe(head));
    const std::string kind = head.text;
    next();
    if (kind == "uniform_int") {
      expect_punct("(", "after uniform_int");
      UniformInt u;
      u.lo = integer(true);
      expect_punct(",", "between uniform_int bounds");
      u.hi = integer(true);
      expect_punct(")", "to close uniform_int");
      return u;
    }
    if (kind == "normal") {
      expect_punct("(", "after normal");
      Normal n;
      n.mu = number(true);
      expect_punct(",", "between normal parameters");
      n.sigma = number(true);
      expect_punct(")", "to close normal");
      for (;;) {
        if (peek().word("round")) {
          next();
          n.round_digits = static_cast<int>(integer(false));
        } else if (peek().word("positive")) {
          next();
          n.positive = true;
        } else {
          break;
        }
      }
      return n;
    }
    if (kind == "bernoulli") {
      expect_punct("(", "after bernoulli");
      Bernoulli b{weight()};
      expect_punct(")", "to close bernoulli");
      return b;
    }
    if (kind == "categorical") {
      expect_punct("(", "after categorical");
      Categorical c;
      do {
        if (peek().punct(")")) break;
        const Token& label = peek();
        if (label.kind != Tok::Ident && label.kind != Tok::String) fail(label, "expected a category label, got " + describe(label));
        next();
        expect_punct(":", "after category label");
        c.weights.emplace_back(label.text, weight());
      } while (peek().punct(",") && (next(), true));
      expect_punct(")", "to close categorical");
      return c;
    }
    if (kind == "case") {
      expect_punct("{", "after case");
      CaseDist cs;
      do {
        if (peek().punct("}")) break;
        CaseArm arm;
        if (peek().word("else")) {
          arm.is_else = true;
          arm.guard = Expr::lit(true, peek().span);
          next();
        } else {
          arm.guard = expression();
        }
        expect_punct(":", "after case guard");
        arm.dist = distribution();
        cs.arms.push_back(std::move(arm));
      } while (peek().punct(",") && (next(), true));
      expect_punct("}", "to close case");
      return cs;
    }
    fail(head, "unknown distribution '" + kind + "'");
  }

  // --- text ------------------------------------------------------------

  Template text(std::string_view what) {
    if (peek().kind != Tok::String) fail(peek(), "expected " + std::string(what) + " string, got " + describe(peek()));
    const SourceSpan span = peek().span;
    std::string joined;
    while (peek().kind == Tok::String) joined += next().text;
    return parse_template(std::move(joined), span, diags_);
  }

  Edge edge(SourceSpan* span = nullptr) {
    const Token& c = identifier("a cause name");
    if (span) *span = c.span;
    expect_punct("->", "in edge");
    const Token& e = identifier("an effect name");
    if (span) *span = join(c.span, e.span);
    return {c.text, e.text};
  }

  // --- declarations ----------------------------------------------------

  void declaration() {
    const Token& kw = peek();
    if (kw.kind != Tok::Ident) fail(kw, "expected a declaration, got " + describe(kw));
    const std::string k = kw.text;
    const SourceSpan kspan = kw.span;
    next();
    if (k == "world") {
      const Token& n = peek();
      std::string name = identifier("the world name").text;
      // Allow hyphenated world names such as math-download.
      while (peek().punct("-") && peek(1).kind == Tok::Ident) {
        next();
        name += "-" + next().text;
      }
      if (saw_world_) fail(kw, "duplicate 'world' declaration");
      saw_world_ = true;
      wf_.model.name = std::move(name);
      wf_.world_span = n.span;
    } else if (k == "exo") {
      const Token& n = identifier("an exogenous variable name");
      expect_punct("~", "after exogenous name");
      ExogenousSpec x{n.text, distribution(), n.span};
      wf_.model.exogenous.push_back(std::move(x));
    } else if (k == "var") {
      const Token& n = identifier("a variable name");
      EndogenousSpec v;
      v.name = n.text;
      v.span = n.span;
      if (peek().punct(":")) {
        next();
        const Token& ty = peek();
        if (ty.word("num")) v.type = VarType::Number;
        else if (ty.word("bool")) v.type = VarType::Bool;
        else fail(ty, "expected 'num' or 'bool' after ':', got " + describe(ty));
        next();
      }
      expect_punct("=", "after variable name");
      v.equation = expression();
      wf_.model.endogenous.push_back(std::move(v));
    } else if (k == "edge") {
      do {
        SourceSpan s;
        Edge e = edge(&s);
        wf_.model.edges.push_back(std::move(e));
        wf_.model.edge_spans.push_back(s);
      } while (peek().punct(",") && (next(), true));
    } else if (k == "context") {
      if (saw_context_) fail(kw, "duplicate 'context' declaration");
      saw_context_ = true;
      wf_.context = text("a context");
    } else if (k == "ask") {
      EffectPhrases p;
      const Token& e = identifier("an effect name");
      p.effect = e.text;
      p.span = e.span;
      p.question = text("a question");
      expect_word("cf", "before the counterfactual fragment");
      p.cf_question = text("a counterfactual fragment");
      expect_word("yes", "before the affirming clause");
      p.yes = text("a clause");
      expect_word("no", "before the denying clause");
      p.no = text("a clause");
      expect_word("cf_yes", "before the counterfactual affirming clause");
      p.cf_yes = text("a clause");
      expect_word("cf_no", "before the counterfactual denying clause");
      p.cf_no = text("a clause");
      wf_.asks.push_back(std::move(p));
    } else if (k == "ask_if") {
      InterventionTemplate t;
      const Token& c = identifier("a cause name");
      t.cause = c.text;
      t.span = c.span;
      expect_punct("=", "after the intervened variable");
      if (peek().word("true")) t.forced = true;
      else if (peek().word("false")) t.forced = false;
      else fail(peek(), "expected 'true' or 'false', got " + describe(peek()));
      next();
      expect_word("about", "before the effect");
      if (peek().punct("*")) {
        next();
        t.effect = std::string(kAnyEffect);
      } else {
        t.effect = identifier("an effect name or '*'").text;
      }
      t.text = text("an intervention question");
      wf_.ask_ifs.push_back(std::move(t));
    } else if (k == "plan") {
      PlanDecl p;
      p.span = kspan;
      const Token& m = peek();
      if (m.kind != Tok::Ident) fail(m, "expected a generalization mode, got " + describe(m));
      std::string mode = next().text;
      while (peek().punct("-") && peek(1).kind == Tok::Ident) {
        next();
        mode += "-" + next().text;
      }
      auto parsed = parse_mode(mode);
      if (!parsed) fail(m, "unknown generalization mode '" + mode + "'");
      p.mode = *parsed;
      if (peek().word("train")) {
        next();
        do p.train.push_back(edge());
        while (peek().punct(",") && (next(), true));
      }
      expect_word("test", "in plan");
      p.test = edge();
      if (peek().word("contexts")) {
        next();
        const Token& at = peek();
        auto n = integer(false);
        if (n < 1 || n > 1000000) fail(at, "contexts must be between 1 and 1000000");
        p.contexts = static_cast<int>(n);
      }
      wf_.plans.push_back(std::move(p));
    } else {
      fail(kw, "unknown declaration '" + k + "'");
    }
  }
};

void ref_error(std::vector<Diagnostic>& diags, SourceSpan s, std::string msg) {
  diags.push_back({DiagKind::Reference, s, "reference error: " + std::move(msg)});
}

void check_references(const WorldFile& wf, std::vector<Diagnostic>& diags) {
  std::set<std::string, std::less<>> exo, endo;
  for (const auto& x : wf.model.exogenous) exo.insert(x.name);
  for (const auto& v : wf.model.endogenous) endo.insert(v.name);
  auto declared = [&](const std::string& n) { return exo.count(n) || endo.count(n); };

  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (e.op == Op::Ref && !declared(e.name)) ref_error(diags, e.span, "undeclared name '" + e.name + "'");
    for (const auto& a : e.args) walk(a);
  };
  std::function<void(const Distribution&)> walk_dist = [&](const Distribution& d) {
    if (const auto* cs = std::get_if<CaseDist>(&d))
      for (const auto& a : cs->arms) {
        walk(a.guard);
        walk_dist(a.dist);
      }
  };
  for (const auto& x : wf.model.exogenous) walk_dist(x.dist);
  for (const auto& v : wf.model.endogenous) walk(v.equation);

  std::set<Edge> edges(wf.model.edges.begin(), wf.model.edges.end());
  for (std::size_t i = 0; i < wf.model.edges.size(); ++i) {
    const auto& e = wf.model.edges[i];
    for (const auto* n : {&e.cause, &e.effect})
      if (!declared(*n)) ref_error(diags, wf.model.edge_spans[i], "edge " + to_string(e) + " names undeclared '" + *n + "'");
  }

  auto check_template = [&](const Template& t) {
    for (const auto& s : t.segments) {
      if (s.kind != Segment::Kind::Value && s.kind != Segment::Kind::Choice) continue;
      if (!declared(s.name)) {
        SourceSpan at{t.span.line, t.span.column + 1 + s.offset, static_cast<int>(s.name.size()) + 2};
        ref_error(diags, at, "template placeholder '{" + s.name + "}' names an undeclared variable '" + s.name + "'");
      }
    }
  };
  if (wf.context) check_template(*wf.context);
  for (const auto& a : wf.asks) {
    if (!endo.count(a.effect)) ref_error(diags, a.span, "'ask' names undeclared effect '" + a.effect + "'");
    for (const auto* t : {&a.question, &a.cf_question, &a.yes, &a.no, &a.cf_yes, &a.cf_no}) check_template(*t);
  }
  for (const auto& t : wf.ask_ifs) {
    if (!endo.count(t.cause)) ref_error(diags, t.span, "'ask_if' names undeclared cause '" + t.cause + "'");
    if (t.effect != kAnyEffect) {
      if (!endo.count(t.effect)) ref_error(diags, t.span, "'ask_if' names undeclared effect '" + t.effect + "'");
      else if (!edges.count({t.cause, t.effect}))
        ref_error(diags, t.span, "'ask_if' template for undeclared edge " + t.cause + "->" + t.effect);
    }
    check_template(t.text);
  }
  for (const auto& p : wf.plans) {
    auto check_edge = [&](const Edge& e) {
      if (!edges.count(e)) ref_error(diags, p.span, "plan uses undeclared edge " + to_string(e));
    };
    for (const auto& e : p.train) check_edge(e);
    check_edge(p.test);
  }
}

}  // namespace

ParseResult parse(std::string_view source) {
  ParseResult result;
  auto tokens = dsl::lex(source, result.diagnostics);
  const bool lex_failed = !result.diagnostics.empty();
  Parser parser(std::move(tokens), result.diagnostics);
  WorldFile wf = parser.run();
  if (!lex_failed && result.diagnostics.empty()) check_references(wf, result.diagnostics);
  if (result.diagnostics.empty()) result.file = std::move(wf);
  return result;
}

}  // namespace causalqa
