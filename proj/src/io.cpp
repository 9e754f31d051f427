#include "hostpar/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hostpar {

using nlohmann::json;

namespace {

constexpr const char* kLawFields[4] = {"law_A_AA", "law_A_AB", "law_A_BB", "law_B"};

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

double read_probability(const json& root, const std::string& key, const std::string& text) {
  if (!root.contains(key)) throw ParseError(key, 0, "missing required field");
  const json& v = root.at(key);
  if (!v.is_number()) throw ParseError(key, line_of_key(text, key), "expected a number");
  return v.get<double>();
}

std::uint64_t read_count(const json& v, const std::string& field, std::size_t line) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    throw ParseError(field, line, "offspring counts must be non-negative");
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ParseError(field, line, "offspring counts must be non-negative integers");
}

JointOffspringLaw read_law(const json& root, const std::string& key, const std::string& text) {
  if (!root.contains(key)) throw ParseError(key, 0, "missing required field");
  const std::size_t line = line_of_key(text, key);
  const json& v = root.at(key);
  if (!v.is_array() || v.empty()) throw ParseError(key, line, "expected a non-empty list of [x0, x1, p]");
  std::vector<SupportPoint> support;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string field = key + "[" + std::to_string(i) + "]";
    const json& e = v[i];
    if (!e.is_array() || e.size() != 3) throw ParseError(field, line, "expected [x0, x1, p]");
    if (!e[2].is_number()) throw ParseError(field, line, "probability must be a number");
    support.push_back({read_count(e[0], field, line), read_count(e[1], field, line), e[2].get<double>()});
  }
  return JointOffspringLaw::from_support(std::move(support), key);
}

json law_to_json(const JointOffspringLaw& law) {
  json arr = json::array();
  for (const auto& s : law.support()) arr.push_back(json::array({s.x0, s.x1, s.p}));
  return arr;
}

json params_to_json(const ModelParams& p) {
  json j;
  j["p_AA"] = p.p_AA;
  j["p_AB"] = p.p_AB;
  j["p_BB"] = p.p_BB;
  j["law_A_AA"] = law_to_json(p.law_A_AA);
  j["law_A_AB"] = law_to_json(p.law_A_AB);
  j["law_A_BB"] = law_to_json(p.law_A_BB);
  j["law_B"] = law_to_json(p.law_B);
  return j;
}

std::string fmt_estimate(double x) { return std::isfinite(x) ? format_double(x) : ""; }

}  // namespace

ParseError::ParseError(std::string field, std::size_t line, const std::string& detail)
    : std::runtime_error("parse error" + (line > 0 ? " at line " + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : " in field '" + field + "'") + ": " + detail),
      field_(std::move(field)),
      line_(line) {}

ModelFile parse_model(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
  }
  if (!root.is_object()) throw ParseError("", 1, "model file must be a JSON object");

  static const char* known[] = {"name", "relaxed", "p_AA", "p_AB", "p_BB", "law_A_AA", "law_A_AB", "law_A_BB", "law_B"};
  for (const auto& [key, _] : root.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ParseError(key, line_of_key(text, key), "unknown field");
    }
  }

  ModelFile file;
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ParseError("name", line_of_key(text, "name"), "expected a string");
    file.name = root["name"].get<std::string>();
  }
  if (root.contains("relaxed")) {
    if (!root["relaxed"].is_boolean()) throw ParseError("relaxed", line_of_key(text, "relaxed"), "expected true/false");
    file.relaxed = root["relaxed"].get<bool>();
  }
  file.params.p_AA = read_probability(root, "p_AA", text);
  file.params.p_AB = read_probability(root, "p_AB", text);
  file.params.p_BB = read_probability(root, "p_BB", text);
  file.params.law_A_AA = read_law(root, kLawFields[0], text);
  file.params.law_A_AB = read_law(root, kLawFields[1], text);
  file.params.law_A_BB = read_law(root, kLawFields[2], text);
  file.params.law_B = read_law(root, kLawFields[3], text);
  return file;
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot open model file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string model_to_json(const ModelFile& file) {
  const ModelParams& p = file.params;
  std::ostringstream out;
  out << "{\n";
  if (!file.name.empty()) out << "  \"name\": " << json(file.name).dump() << ",\n";
  if (file.relaxed) out << "  \"relaxed\": true,\n";
  out << "  \"p_AA\": " << json(p.p_AA).dump() << ",\n";
  out << "  \"p_AB\": " << json(p.p_AB).dump() << ",\n";
  out << "  \"p_BB\": " << json(p.p_BB).dump() << ",\n";
  const JointOffspringLaw* laws[4] = {&p.law_A_AA, &p.law_A_AB, &p.law_A_BB, &p.law_B};
  for (int i = 0; i < 4; ++i) {
    out << "  \"" << kLawFields[i] << "\": [";
    bool first = true;
    for (const auto& s : laws[i]->support()) {
      out << (first ? "" : ", ") << json::array({s.x0, s.x1, s.p}).dump();
      first = false;
    }
    out << (i < 3 ? "],\n" : "]\n");
  }
  out << "}\n";
  return out.str();
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << model_to_json(file);
}

Validation validate(const ModelFile& file) { return validate(file.params, ValidationOptions{file.relaxed}); }

std::string params_hash(const ModelParams& params) {
  const std::string canonical = params_to_json(params).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_header_comment(const RunMetadata& meta) {
  std::string s = "# tool=hostpar version=" + std::string(kToolVersion) + " command=" + meta.command +
                  " params_hash=" + meta.params_hash;
  if (meta.seed) s += " seed=" + std::to_string(*meta.seed);
  return s + "\n";
}

void write_trajectory_csv(std::ostream& out, const RunMetadata& meta, const std::vector<Trajectory>& replicates,
                          const DerivedQuantities& d) {
  out << csv_header_comment(meta);
  out << "replicate,n,G_star_A,G_star_B,clean_A,clean_B,Z_A,Z_B,W_n,LA_n,L_n,truncated_flag\n";
  for (std::size_t r = 0; r < replicates.size(); ++r) {
    const Trajectory& t = replicates[r];
    for (const auto& g : t.generations) {
      const double n = static_cast<double>(g.n);
      const double W = to_double(g.Z_A) * std::pow(d.gamma, -n);
      const double LA = static_cast<double>(g.G_star_A) * std::pow(d.nu, -n);
      const double L = static_cast<double>(g.G_star_A + g.G_star_B) * std::pow(2.0, -n);
      out << r << ',' << g.n << ',' << g.G_star_A << ',' << g.G_star_B << ',' << g.clean_A << ','
          << to_decimal(g.clean_B) << ',' << to_decimal(g.Z_A) << ',' << to_decimal(g.Z_B) << ','
          << format_double(W) << ',' << format_double(LA) << ',' << format_double(L) << ','
          << (t.truncated ? 1 : 0) << '\n';
    }
  }
}

void write_mc_csv(std::ostream& out, const RunMetadata& meta, const McSummary& summary) {
  out << csv_header_comment(meta);
  out << "generation,statistic,k,estimate,ci_lo,ci_hi\n";
  auto row = [&](std::size_t n, const std::string& stat, std::optional<std::size_t> k, const Estimate& e) {
    out << n << ',' << stat << ',' << (k ? std::to_string(*k) : std::string()) << ',' << fmt_estimate(e.value)
        << ',' << fmt_estimate(e.ci_lo) << ',' << fmt_estimate(e.ci_hi) << '\n';
  };
  const bool full = summary.b_tracked();
  for (std::size_t n = 0; n < summary.generations.size(); ++n) {
    const auto& g = summary.generations[n];
    for (Track t : {Track::W, Track::LA, Track::L, Track::WB, Track::GA, Track::Z_A, Track::Z_B, Track::G_star_A,
                    Track::G_star_B}) {
      if (!full && (t == Track::WB || t == Track::Z_B || t == Track::G_star_B || t == Track::L)) continue;
      row(n, to_string(t), std::nullopt, track_mean(summary, n, t));
    }
    row(n, "survival_A", std::nullopt, survival_frequency(summary, n, false));
    if (full) {
      row(n, "survival_all", std::nullopt, survival_frequency(summary, n, true));
      row(n, "proportion_A", std::nullopt, g.proportion_A.estimate());
    }
    static const char* names[3] = {"F_A", "F_B", "F_all"};
    for (int t = 0; t < 3; ++t) {
      if (!full && t > 0) continue;
      for (std::size_t k = 1; k <= g.F[t].size(); ++k) row(n, names[t], k, g.F[t][k - 1].estimate());
    }
  }
}

std::string mc_csv(const ModelFile& file, const McConfig& cfg) {
  const Validation v = validate(file);
  const McSummary summary = run_mc(v.value(), cfg);
  std::ostringstream out;
  write_mc_csv(out, {"mc", params_hash(file.params), cfg.master_seed}, summary);
  return out.str();
}

void write_pmf_csv(std::ostream& out, const RunMetadata& meta, const PmfVector& pmf) {
  out << csv_header_comment(meta);
  out << "k,probability\n";
  for (std::size_t k = 0; k < pmf.p.size(); ++k) out << k << ',' << format_double(pmf.p[k]) << '\n';
}

namespace {

std::string opt_str(const std::optional<double>& x) { return x ? format_double(*x) : "undefined"; }

struct ReportLine {
  std::string key;
  std::string value;
  std::string reason;
};

std::vector<std::pair<std::string, std::optional<double>>> derived_fields(const DerivedQuantities& d) {
  return {{"nu", d.nu},
          {"gamma", d.gamma},
          {"gamma_hat", d.gamma_hat},
          {"mu_0B", d.mu_0B},
          {"mu_1B", d.mu_1B},
          {"mu_B", d.mu_B},
          {"mu_B_product", d.mu_B_product},
          {"E_log_gprime", d.E_log_gprime},
          {"E_gprime_log_gprime", d.E_gprime_log_gprime},
          {"phi_min", d.phi_min},
          {"theta_star", d.theta_star},
          {"supc_product", d.supc_product},
          {"beta", d.beta},
          {"eta", d.eta},
          {"ab_flux", d.ab_flux},
          {"B_sslog", d.B_sslog}};
}

std::vector<ReportLine> flag_lines(const ModelParams& p, const RegimeReport& r) {
  const DerivedQuantities& d = r.derived;
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  const std::string f_nu = "nu = " + format_double(d.nu);
  const std::string f_elog = "E log g'(1) = " + opt_str(d.E_log_gprime);
  std::string a_reason;
  if (p.p_AA == 0.0) {
    a_reason = "p_AA = 0, " + f_nu + ", mu_0A(AB) = " + format_double(p.law_A_AB.mean(0));
  } else {
    a_reason = f_nu + " vs 1, " + f_elog + " vs 0, phi_min = " + opt_str(d.phi_min) +
               " vs 1/nu = " + format_double(d.nu > 0 ? 1.0 / d.nu : std::numeric_limits<double>::infinity());
  }
  return {
      {"a_parasites_as_extinction", b(r.a_parasites_as_extinction), a_reason},
      {"all_parasites_as_extinction", b(r.all_parasites_as_extinction),
       "A-extinction " + b(r.a_parasites_as_extinction) + ", mu_B = " + format_double(d.mu_B) + " vs 1"},
      {"bpre_class", to_string(r.bpre_class),
       f_elog + " vs 0, E g'(1) log g'(1) = " + opt_str(d.E_gprime_log_gprime) + " vs 0"},
      {"kappa", r.kappa == Kappa::not_applicable ? "not_applicable" : format_double(kappa_value(r.kappa)),
       std::string("from bpre_class ") + to_string(r.bpre_class)},
      {"LA_trivial", b(r.LA_trivial), f_elog + " vs 0, " + f_nu + " vs 1"},
      {"L_trivial", b(r.L_trivial), "mu_0B * mu_1B = " + format_double(d.mu_B_product) + " vs 1"},
      {"thm31_applies", b(r.thm31_applies), "requires L_trivial = false"},
      {"thm32_applies", b(r.thm32_applies), "supc_product = " + format_double(d.supc_product) + " vs 1"},
      {"thm32c_applies", b(r.thm32c_applies),
       "supc_product = " + format_double(d.supc_product) + " vs 1, mu_B = " + format_double(d.mu_B) +
           " vs gamma = " + format_double(d.gamma) + ", B_sslog = " + format_double(d.B_sslog) + " vs 0"},
      {"w_L2_bounded", b(r.w_L2_bounded),
       "gamma = " + format_double(d.gamma) + " vs 1, gamma_hat = " + format_double(d.gamma_hat) + " vs gamma"},
  };
}

}  // namespace

std::string classify_text(const ModelFile& file, const RegimeReport& report) {
  std::ostringstream out;
  out << "model: " << (file.name.empty() ? "(unnamed)" : file.name) << "\n";
  out << "params_hash: " << params_hash(file.params) << "\n";
  out << "derived:\n";
  for (const auto& [key, value] : derived_fields(report.derived)) out << "  " << key << ": " << opt_str(value) << "\n";
  out << "flags:\n";
  for (const auto& line : flag_lines(file.params, report)) {
    out << "  " << line.key << ": " << line.value << "    # " << line.reason << "\n";
  }
  out << "marginal:";
  if (report.marginal.empty()) out << " none";
  out << "\n";
  for (const auto& m : report.marginal) out << "  - " << m << "\n";
  return out.str();
}

std::string classify_json(const ModelFile& file, const RegimeReport& report) {
  json j;
  j["tool"] = "hostpar";
  j["version"] = kToolVersion;
  j["model"] = file.name;
  j["params_hash"] = params_hash(file.params);
  json derived = json::object();
  for (const auto& [key, value] : derived_fields(report.derived)) {
    if (value && std::isfinite(*value)) {
      derived[key] = *value;
    } else if (value) {
      derived[key] = format_double(*value);
    } else {
      derived[key] = nullptr;
    }
  }
  j["derived"] = derived;
  json flags = json::object();
  json reasons = json::object();
  for (const auto& line : flag_lines(file.params, report)) {
    if (line.value == "true" || line.value == "false") {
      flags[line.key] = line.value == "true";
    } else {
      flags[line.key] = line.value;
    }
    reasons[line.key] = line.reason;
  }
  j["flags"] = flags;
  j["reasons"] = reasons;
  j["marginal"] = report.marginal;
  return j.dump(2) + "\n";
}

}  // namespace hostpar
