#include "causalqa/worlds.hpp"

#include <charconv>
#include <filesystem>

#include "causalqa/assets.hpp"

namespace causalqa {

std::string_view world_id_name(BuiltinWorldId id) noexcept {
  switch (id) {
    case BuiltinWorldId::CandyBipartite: return "candy-bipartite";
    case BuiltinWorldId::CandyChainNde: return "candy-chain-nde";
    case BuiltinWorldId::CandyChainWde: return "candy-chain-wde";
    case BuiltinWorldId::Healthcare: return "healthcare";
    case BuiltinWorldId::Engineering: return "engineering";
    case BuiltinWorldId::MathDownload: return "math-download";
  }
  return "?";
}

std::optional<BuiltinWorldId> parse_world_id(std::string_view name) noexcept {
  for (auto id : kBuiltinWorlds)
    if (world_id_name(id) == name) return id;
  return std::nullopt;
}

std::string_view world_file_name(BuiltinWorldId id) noexcept {
  switch (id) {
    case BuiltinWorldId::CandyBipartite: return "candy1.world";
    case BuiltinWorldId::CandyChainNde: return "candy2.world";
    case BuiltinWorldId::CandyChainWde: return "candy3.world";
    case BuiltinWorldId::Healthcare: return "healthcare.world";
    case BuiltinWorldId::Engineering: return "engineering.world";
    case BuiltinWorldId::MathDownload: return "math-download.world";
  }
  return "?";
}

std::string_view builtin_source(BuiltinWorldId id) {
  auto text = assets::find(world_file_name(id));
  if (!text) throw ModelError("world asset missing: " + std::string(world_file_name(id)));
  return *text;
}

World load_builtin(BuiltinWorldId id) {
  return load_world(builtin_source(id), "worlds/" + std::string(world_file_name(id)));
}

std::set<GeneralizationMode> availability(const World& world) {
  std::set<GeneralizationMode> out;
  for (const auto& p : world.plans) out.insert(p.mode);
  return out;
}

std::set<GeneralizationMode> availability(BuiltinWorldId id) { return availability(load_builtin(id)); }

World resolve_world(std::string_view id_or_path) {
  if (auto id = parse_world_id(id_or_path)) return load_builtin(*id);
  const std::filesystem::path p{std::string(id_or_path)};
  if (!std::filesystem::exists(p))
    throw UsageError("'" + std::string(id_or_path) + "' is neither a builtin world nor an existing file");
  return load_world_file(p);
}

std::vector<FaultMeans> parse_means_csv(std::string_view text) {
  std::vector<FaultMeans> out;
  int line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    auto fail = [&](const std::string& msg) {
      throw ModelError(std::vector<Diagnostic>{{DiagKind::Definition, {line_no, 1, 0}, msg}}, "means.csv");
    };
    if (cells.size() != 4) fail("expected 4 columns, got " + std::to_string(cells.size()));
    if (header) {
      header = false;
      if (cells[0] != "fault_class" || cells[1] != "x_mean" || cells[2] != "y_mean" || cells[3] != "z_mean")
        fail("header must be fault_class,x_mean,y_mean,z_mean");
      continue;
    }
    FaultMeans m;
    m.fault_class = std::string(cells[0]);
    if (m.fault_class.empty()) fail("empty fault_class");
    double* dst[] = {&m.x_mean, &m.y_mean, &m.z_mean};
    for (int k = 0; k < 3; ++k) {
      auto c = cells[static_cast<std::size_t>(k) + 1];
      auto res = std::from_chars(c.data(), c.data() + c.size(), *dst[k]);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) fail("malformed number '" + std::string(c) + "'");
    }
    out.push_back(std::move(m));
  }
  if (out.empty()) throw ModelError("means.csv has no rows");
  return out;
}

namespace {

std::string mean_text(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos) s += ".0";
  return s;
}

struct EffectText {
  const char* var;
  const char* question;
  const char* cf;
  const char* yes;
  const char* no;
  const char* cf_yes;
  const char* cf_no;
};

}  // namespace

std::string render_engineering_world(const std::vector<FaultMeans>& means) {
  std::string s =
      "# Transmission-line fault classification.  Factor means per fault class\n"
      "# come from means.csv; each class is equally likely.\n"
      "world engineering\n\n";

  s += "exo fault ~ categorical(";
  for (std::size_t i = 0; i < means.size(); ++i)
    s += (i ? ", " : "") + means[i].fault_class + ": 1/" + std::to_string(means.size());
  s += ")\n";
  const char* factors[] = {"X", "Y", "Z"};
  for (int f = 0; f < 3; ++f) {
    s += std::string("exo ") + factors[f] + " ~ case {\n";
    for (std::size_t i = 0; i < means.size(); ++i) {
      const double mu = f == 0 ? means[i].x_mean : f == 1 ? means[i].y_mean : means[i].z_mean;
      s += "    fault == \"" + means[i].fault_class + "\": normal(" + mean_text(mu) + ", 0.1) round 2 positive";
      s += i + 1 < means.size() ? ",\n" : "\n";
    }
    s += "  }\n";
  }

  s +=
      "\n"
      "var X0 = X < 0.1\n"
      "var Y0 = Y < 0.1\n"
      "var Z0 = Z < 0.1\n"
      "var LL = (X0 and not Y0 and not Z0) or (not X0 and Y0 and not Z0) or (not X0 and not Y0 and Z0)\n"
      "var LG = (not X0 and Y0 and Z0) or (X0 and not Y0 and Z0) or (X0 and Y0 and not Z0) or (X0 and Y0 and Z0)\n"
      "var BC = LL and X0\n"
      "var AC = LL and Y0\n"
      "var AB = LL and Z0\n"
      "var AG = LG and Y0 and Z0\n"
      "var BG = LG and X0 and Z0\n"
      "var CG = LG and X0 and Y0\n"
      "\n"
      "edge X0 -> LL, X0 -> LG, X0 -> BC, X0 -> AC, X0 -> AB, X0 -> AG, X0 -> BG, X0 -> CG\n"
      "edge Y0 -> LL, Y0 -> LG, Y0 -> BC, Y0 -> AC, Y0 -> AB, Y0 -> AG, Y0 -> BG, Y0 -> CG\n"
      "edge Z0 -> LL, Z0 -> LG, Z0 -> BC, Z0 -> AC, Z0 -> AB, Z0 -> AG, Z0 -> BG, Z0 -> CG\n"
      "edge LL -> BC, LL -> AC, LL -> AB\n"
      "edge LG -> AG, LG -> BG, LG -> CG\n"
      "\n"
      "context \"The type of fault on a transmission line is determined through three factors X, Y, and Z. \"\n"
      "  \"These factors are `close to zero' if they are less than 0.1. \"\n"
      "  \"(1) If only one of the factors is close to zero, it is a line-to-line fault. \"\n"
      "  \"When there is a line-to-line fault, it is BC fault if factor X is close to zero, AC fault if factor Y is close to zero, \"\n"
      "  \"and AB fault if factor Z is close to zero. \"\n"
      "  \"(2) If exactly two of the factors are close to zero, it is a line-to-ground fault. \"\n"
      "  \"When there is a line-to-ground fault, it is AG fault if factors Y and Z are both close to zero, \"\n"
      "  \"BG fault if factors X and Z are both close to zero, and CG fault if factors X and Y are both close to zero. \"\n"
      "  \"For some faulty transmission line, X = {X}, Y = {Y}, and Z = {Z}.\"\n";

  const EffectText effects[] = {
      {"LL", "Is there a line-to-line fault?", "would there have been a line-to-line fault?",
       "there is a line-to-line fault", "there is no line-to-line fault",
       "there would have been a line-to-line fault", "there would not have been a line-to-line fault"},
      {"LG", "Is there a line-to-ground fault?", "would there have been a line-to-ground fault?",
       "there is a line-to-ground fault", "there is no line-to-ground fault",
       "there would have been a line-to-ground fault", "there would not have been a line-to-ground fault"},
  };
  for (const auto& e : effects) {
    s += std::string("\nask ") + e.var + " \"" + e.question + " Be as concise as possible.\"\n" +
         "  cf \"" + e.cf + " Be as concise as possible.\"\n" + "  yes \"" + e.yes + "\"\n" + "  no \"" + e.no +
         "\"\n" + "  cf_yes \"" + e.cf_yes + "\"\n" + "  cf_no \"" + e.cf_no + "\"\n";
  }
  for (const char* t : {"BC", "AC", "AB", "AG", "BG", "CG"}) {
    const std::string ty(t);
    s += "\nask " + ty + " \"Is the fault type " + ty + "? Be as concise as possible.\"\n" +
         "  cf \"would the fault have been type " + ty + "? Be as concise as possible.\"\n" +
         "  yes \"the fault is type " + ty + "\"\n" + "  no \"the fault is not type " + ty + "\"\n" +
         "  cf_yes \"the fault would have been type " + ty + "\"\n" +
         "  cf_no \"the fault would not have been type " + ty + "\"\n";
  }

  s += "\n";
  for (const char* f : factors) {
    s += std::string("ask_if ") + f + "0=true about * \"If factor " + f + " had been close to zero, {cf_question}\"\n";
    s += std::string("ask_if ") + f + "0=false about * \"If factor " + f + " had not been close to zero, {cf_question}\"\n";
  }
  s +=
      "ask_if LL=true about * \"If there had been a line-to-line fault, {cf_question}\"\n"
      "ask_if LL=false about * \"If there had not been a line-to-line fault, {cf_question}\"\n"
      "ask_if LG=true about * \"If there had been a line-to-ground fault, {cf_question}\"\n"
      "ask_if LG=false about * \"If there had not been a line-to-ground fault, {cf_question}\"\n"
      "\n"
      "plan in-domain test X0 -> LL\n"
      "plan common-cause train X0 -> LL test X0 -> LG\n"
      "plan common-effect train X0 -> LL test Y0 -> LL\n"
      "plan inductive train X0 -> LL, LL -> BC test X0 -> BC\n";
  return s;
}

}  // namespace causalqa
