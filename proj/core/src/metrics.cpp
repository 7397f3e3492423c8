#include "causalqa/metrics.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "causalqa/diagnostics.hpp"

namespace causalqa {

std::string_view relation_name(Relation r) noexcept {
  switch (r) {
    case Relation::N: return "N";
    case Relation::S: return "S";
    case Relation::AN: return "AN";
    case Relation::AS: return "AS";
  }
  return "?";
}

std::string_view class_name(CauseEffectClass c) noexcept {
  switch (c) {
    case CauseEffectClass::Occurs: return "occurs";
    case CauseEffectClass::OccursNot: return "occurs-not";
    case CauseEffectClass::Irrelevant: return "irrelevant";
  }
  return "?";
}

CauseEffectClass classify(Relation r, bool x, bool y, bool y_cf) noexcept {
  bool cell = false;
  switch (r) {
    case Relation::N: cell = x && y; break;
    case Relation::S: cell = !x && !y; break;
    case Relation::AN: cell = !x && y; break;
    case Relation::AS: cell = x && !y; break;
  }
  if (!cell) return CauseEffectClass::Irrelevant;
  return y_cf != y ? CauseEffectClass::Occurs : CauseEffectClass::OccursNot;
}

bool scored_y_hat(const UnitEval& u) noexcept { return u.y_hat.value_or(!u.outcome.y); }
bool scored_y_cf_hat(const UnitEval& u) noexcept { return u.y_cf_hat.value_or(!u.outcome.y_cf); }

namespace {
void require_nonempty(std::span<const UnitEval> units) {
  if (units.empty()) throw UsageError("metrics need at least one unit");
}
}  // namespace

ErrorRates error_rates(std::span<const UnitEval> units) {
  require_nonempty(units);
  std::size_t f = 0, cf = 0;
  for (const auto& u : units) {
    f += scored_y_hat(u) != u.outcome.y;
    cf += scored_y_cf_hat(u) != u.outcome.y_cf;
  }
  const double n = static_cast<double>(units.size());
  ErrorRates r{f / n, cf / n, 0};
  r.avg_er = (r.f_er + r.cf_er) / 2;
  return r;
}

InconsistencyRates inconsistency_rates(std::span<const UnitEval> units) {
  require_nonempty(units);
  std::array<std::size_t, 4> miss{};
  for (const auto& u : units) {
    const auto& o = u.outcome;
    const bool yh = scored_y_hat(u), ych = scored_y_cf_hat(u);
    for (std::size_t i = 0; i < 4; ++i)
      miss[i] += classify(kRelations[i], o.x, yh, ych) != classify(kRelations[i], o.x, o.y, o.y_cf);
  }
  const double n = static_cast<double>(units.size());
  InconsistencyRates r{miss[0] / n, miss[1] / n, miss[2] / n, miss[3] / n, 0};
  r.avg_ir = (r.n_ir + r.s_ir + r.an_ir + r.as_ir) / 4;
  return r;
}

PnPs pn_ps(std::span<const UnitEval> units, bool use_estimates) {
  require_nonempty(units);
  std::size_t pn_num = 0, pn_den = 0, ps_num = 0, ps_den = 0;
  for (const auto& u : units) {
    const bool x = u.outcome.x;
    const bool y = use_estimates ? scored_y_hat(u) : u.outcome.y;
    const bool y_cf = use_estimates ? scored_y_cf_hat(u) : u.outcome.y_cf;
    if (x && y) {
      ++pn_den;
      pn_num += !y_cf;
    } else if (!x && !y) {
      ++ps_den;
      ps_num += y_cf;
    }
  }
  PnPs r;
  if (pn_den) r.pn = static_cast<double>(pn_num) / static_cast<double>(pn_den);
  if (ps_den) r.ps = static_cast<double>(ps_num) / static_cast<double>(ps_den);
  return r;
}

int ccf_reward(bool x, bool y, bool y_cf, bool y_hat, bool y_cf_hat) noexcept {
  int r = 0;
  for (Relation rel : kRelations) r += classify(rel, x, y_hat, y_cf_hat) == classify(rel, x, y, y_cf);
  return r;
}

std::string_view metric_name(Metric m) noexcept {
  static constexpr std::array<std::string_view, kMetricCount> names{
      "f_er", "cf_er", "avg_er", "n_ir", "s_ir", "an_ir", "as_ir", "avg_ir", "pn_hat", "ps_hat", "pn_true", "ps_true"};
  return names[static_cast<std::size_t>(m)];
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  for (Metric m : kMetrics)
    if (metric_name(m) == name) return m;
  return std::nullopt;
}

SampleMetrics sample_metrics(std::span<const UnitEval> units) {
  const auto er = error_rates(units);
  const auto ir = inconsistency_rates(units);
  const auto est = pn_ps(units, true);
  const auto tru = pn_ps(units, false);
  SampleMetrics s;
  s.values = {er.f_er, er.cf_er, er.avg_er, ir.n_ir, ir.s_ir, ir.an_ir, ir.as_ir, ir.avg_ir,
              est.pn,  est.ps,   tru.pn,    tru.ps};
  return s;
}

MetricsReport aggregate(std::span<const SampleReport> samples) {
  if (samples.empty()) throw UsageError("aggregate needs at least one sample");
  MetricsReport out;
  out.meta = samples.front().meta;
  for (const auto& s : samples) {
    const auto& m = s.meta;
    if (m.world != out.meta.world || m.mode != out.meta.mode || m.edge != out.meta.edge || m.method != out.meta.method)
      throw UsageError("cannot aggregate samples of different runs (" + out.meta.world + "/" + out.meta.edge + "/" +
                       out.meta.method + " vs " + m.world + "/" + m.edge + "/" + m.method + ")");
  }
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& s : samples)
      if (auto v = s.metrics.values[k]) sum += *v, ++n;
    Stat st;
    st.count = n;
    if (n) {
      st.mean = sum / static_cast<double>(n);
      double ss = 0;
      for (const auto& s : samples)
        if (auto v = s.metrics.values[k]) ss += (*v - st.mean) * (*v - st.mean);
      st.std = std::sqrt(ss / static_cast<double>(n));
    }
    out.stats[k] = st;
  }
  return out;
}

std::vector<NormalizedScore> normalize(std::span<const MetricsReport> reports, std::string_view base_method) {
  using Key = std::pair<std::string, std::string>;  // world, mode
  std::map<Key, const MetricsReport*> base;
  for (const auto& r : reports)
    if (r.meta.method == base_method) {
      if (!base.emplace(Key{r.meta.world, r.meta.mode}, &r).second)
        throw UsageError("duplicate base report for " + r.meta.world + " / " + r.meta.mode);
    }
  std::map<std::pair<std::string, std::string>, NormalizedScore> acc;  // mode, method
  for (const auto& r : reports) {
    auto it = base.find(Key{r.meta.world, r.meta.mode});
    if (it == base.end())
      throw UsageError("no '" + std::string(base_method) + "' report for " + r.meta.world + " / " + r.meta.mode);
    const double ber = it->second->get(Metric::AvgEr).mean;
    const double bir = it->second->get(Metric::AvgIr).mean;
    if (ber == 0 || bir == 0)
      throw UsageError("base method has zero Avg-ER or Avg-IR on " + r.meta.world + " / " + r.meta.mode);
    auto& s = acc[{r.meta.mode, r.meta.method}];
    s.mode = r.meta.mode;
    s.method = r.meta.method;
    s.avg_er += r.get(Metric::AvgEr).mean / ber;
    s.avg_ir += r.get(Metric::AvgIr).mean / bir;
    ++s.worlds;
  }
  std::vector<NormalizedScore> out;
  for (auto& [k, s] : acc) {
    s.avg_er /= static_cast<double>(s.worlds);
    s.avg_ir /= static_cast<double>(s.worlds);
    out.push_back(s);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') fields.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else fields.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw UsageError("line " + std::to_string(lineno) + ": unterminated quote");
  return fields;
}

double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw UsageError("line " + std::to_string(lineno) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string to_csv(std::span<const MetricsReport> reports, bool header) {
  std::string out;
  if (header) out += std::string(kReportCsvHeader) + "\n";
  for (const auto& r : reports) {
    const std::string prefix = csv_field(r.meta.world) + "," + csv_field(r.meta.mode) + "," + csv_field(r.meta.edge) +
                               "," + csv_field(r.meta.method) + ",";
    for (Metric m : kMetrics) {
      const Stat& s = r.get(m);
      out += prefix + std::string(metric_name(m)) + ",";
      if (s.present()) out += format_number(s.mean) + "," + format_number(s.std);
      else out += ",";
      out += "," + std::to_string(s.count) + "\n";
    }
  }
  return out;
}

std::vector<MetricsReport> parse_report_csv(std::string_view text) {
  std::vector<MetricsReport> out;
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::size_t> index;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kReportCsvHeader)
        throw UsageError("line 1: expected header '" + std::string(kReportCsvHeader) + "'");
      continue;
    }
    auto f = split_csv_line(line, lineno);
    if (f.size() != 8) throw UsageError("line " + std::to_string(lineno) + ": expected 8 fields, got " + std::to_string(f.size()));
    auto metric = parse_metric(f[4]);
    if (!metric) throw UsageError("line " + std::to_string(lineno) + ": unknown metric '" + f[4] + "'");
    auto key = std::make_tuple(f[0], f[1], f[2], f[3]);
    auto [it, fresh] = index.emplace(key, out.size());
    if (fresh) {
      MetricsReport r;
      r.meta = {f[0], f[1], f[2], f[3], {}};
      out.push_back(std::move(r));
    }
    Stat& s = out[it->second].get(*metric);
    s.count = static_cast<std::size_t>(parse_double(f[7], lineno));
    if (s.count) {
      s.mean = parse_double(f[5], lineno);
      s.std = parse_double(f[6], lineno);
    }
  }
  return out;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["world"] = report.meta.world;
  j["mode"] = report.meta.mode;
  j["edge"] = report.meta.edge;
  j["method"] = report.meta.method;
  j["seeds"] = report.meta.seeds;
  auto& metrics = j["metrics"] = nlohmann::ordered_json::object();
  for (Metric m : kMetrics) {
    const Stat& s = report.get(m);
    nlohmann::ordered_json e;
    if (s.present()) {
      e["mean"] = s.mean;
      e["std"] = s.std;
    } else {
      e["mean"] = nullptr;
      e["std"] = nullptr;
    }
    e["count"] = s.count;
    metrics[std::string(metric_name(m))] = std::move(e);
  }
  j["undecidable"] = report.undecidable;
  j["failed"] = report.failed;
  j["flagged_repeats"] = report.flagged_repeats;
  return j.dump(2);
}

}  // namespace causalqa
