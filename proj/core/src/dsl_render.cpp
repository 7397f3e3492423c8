#include <cmath>

#include "causalqa/dsl.hpp"

namespace causalqa {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) {
  if (std::trunc(v) == v && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  return format_real(v);
}

std::string weight(const Weight& w) {
  if (w.den == 1.0) return number(w.num);
  return number(w.num) + "/" + number(w.den);
}

std::string dist(const Distribution& d, int indent) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformInt>) {
          return "uniform_int(" + std::to_string(v.lo) + ", " + std::to_string(v.hi) + ")";
        } else if constexpr (std::is_same_v<T, Normal>) {
          std::string s = "normal(" + number(v.mu) + ", " + number(v.sigma) + ")";
          if (v.round_digits >= 0) s += " round " + std::to_string(v.round_digits);
          if (v.positive) s += " positive";
          return s;
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          return "bernoulli(" + weight(v.p) + ")";
        } else if constexpr (std::is_same_v<T, Categorical>) {
          std::string s = "categorical(";
          for (std::size_t i = 0; i < v.weights.size(); ++i) {
            if (i) s += ", ";
            s += v.weights[i].first + ": " + weight(v.weights[i].second);
          }
          return s + ")";
        } else {
          const std::string pad(static_cast<std::size_t>(indent + 4), ' ');
          std::string s = "case {\n";
          for (std::size_t i = 0; i < v.arms.size(); ++i) {
            const auto& a = v.arms[i];
            s += pad + (a.is_else ? std::string("else") : to_source(a.guard)) + ": " + dist(a.dist, indent + 4);
            s += i + 1 < v.arms.size() ? ",\n" : "\n";
          }
          return s + std::string(static_cast<std::size_t>(indent + 2), ' ') + "}";
        }
      },
      d);
}

}  // namespace

std::string render(const WorldFile& f) {
  const auto& m = f.model;
  std::string out = "world " + m.name + "\n";

  if (!m.exogenous.empty()) out += "\n";
  for (const auto& x : m.exogenous) out += "exo " + x.name + " ~ " + dist(x.dist, 0) + "\n";

  if (!m.endogenous.empty()) out += "\n";
  for (const auto& v : m.endogenous)
    out += "var " + v.name + (v.type == VarType::Number ? ": num" : "") + " = " + to_source(v.equation) + "\n";

  if (!m.edges.empty()) out += "\n";
  for (const auto& e : m.edges) out += "edge " + e.cause + " -> " + e.effect + "\n";

  if (f.context) out += "\ncontext " + quote(f.context->source) + "\n";

  for (const auto& a : f.asks) {
    out += "\nask " + a.effect + " " + quote(a.question.source) + "\n";
    out += "  cf " + quote(a.cf_question.source) + "\n";
    out += "  yes " + quote(a.yes.source) + "\n";
    out += "  no " + quote(a.no.source) + "\n";
    out += "  cf_yes " + quote(a.cf_yes.source) + "\n";
    out += "  cf_no " + quote(a.cf_no.source) + "\n";
  }

  if (!f.ask_ifs.empty()) out += "\n";
  for (const auto& t : f.ask_ifs)
    out += "ask_if " + t.cause + "=" + (t.forced ? "true" : "false") + " about " + t.effect + " " +
           quote(t.text.source) + "\n";

  if (!f.plans.empty()) out += "\n";
  for (const auto& p : f.plans) {
    out += "plan " + std::string(mode_name(p.mode));
    if (!p.train.empty()) {
      out += " train ";
      for (std::size_t i = 0; i < p.train.size(); ++i)
        out += (i ? ", " : "") + p.train[i].cause + " -> " + p.train[i].effect;
    }
    out += " test " + p.test.cause + " -> " + p.test.effect;
    if (p.contexts) out += " contexts " + std::to_string(*p.contexts);
    out += "\n";
  }
  return out;
}

}  // namespace causalqa
