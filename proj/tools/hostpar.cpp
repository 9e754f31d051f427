// hostpar command-line interface.
//
// Exit codes: 0 success, 1 check failure or runtime error, 2 usage/parse error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hostpar/io.hpp"
#include "hostpar/verify.hpp"
#include "json.hpp"

#ifndef HOSTPAR_MODEL_DIR
#define HOSTPAR_MODEL_DIR "models"
#endif

namespace fs = std::filesystem;
using namespace hostpar;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string model;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::size_t workers = 1;
};

ModelFile require_model(const Globals& g) {
  if (g.model.empty()) throw UsageError("--model is required");
  return load_model(g.model);
}

std::uint64_t require_seed(const Globals& g) {
  if (!g.seed) throw UsageError("--seed is required (no default entropy source)");
  return *g.seed;
}

// Writes the primary output either to stdout or to <out>/<stem>.<ext>.
void emit(const Globals& g, const std::string& stem, const std::string& ext, const std::string& body) {
  if (g.out.empty()) {
    std::cout << body;
    return;
  }
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / (stem + "." + ext);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
}

// Sidecar metadata next to a CSV; skipped when writing to stdout.
void emit_sidecar(const Globals& g, const std::string& stem, const json& meta) {
  if (g.out.empty()) return;
  emit(g, stem + ".meta", "json", meta.dump(2) + "\n");
}

json base_meta(const std::string& command, const ModelFile& file, std::optional<std::uint64_t> seed) {
  json j;
  j["tool"] = "hostpar";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["model"] = file.name;
  j["params_hash"] = params_hash(file.params);
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

json caps_json(const SimCaps& c) {
  return {{"max_generations", c.max_generations},
          {"max_roster", c.max_roster},
          {"max_parasites_per_cell", c.max_parasites_per_cell},
          {"explicit_sum_limit", c.explicit_sum_limit}};
}

CellType parse_type(const std::string& s) {
  if (s == "A") return CellType::A;
  if (s == "B") return CellType::B;
  throw UsageError("cell type must be A or B");
}

SimScope parse_scope(const std::string& s) {
  if (s == "full") return SimScope::full;
  if (s == "a_only") return SimScope::a_only;
  throw UsageError("scope must be full or a_only");
}

// ---------------------------------------------------------------------------

int cmd_classify(const Globals& g, double tol) {
  const ModelFile file = require_model(g);
  const RegimeReport report = classify(validate(file).value(), tol);
  if (g.format == "json") {
    emit(g, "classify", "json", classify_json(file, report));
  } else {
    std::cout << classify_text(file, report);
    if (!g.out.empty()) emit(g, "classify", "json", classify_json(file, report));
  }
  return kOk;
}

struct SimulateArgs {
  std::size_t n_gens = 10;
  std::size_t replicates = 1;
  std::string start_type = "A";
  std::uint64_t start_z = 1;
  std::string scope = "full";
  SimCaps caps;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const ModelFile file = require_model(g);
  const std::uint64_t seed = require_seed(g);
  const ValidatedModel model = validate(file).value();
  const SimEngine engine(model, a.caps);
  TreeOptions opts;
  opts.start_type = parse_type(a.start_type);
  opts.start_z = a.start_z;
  opts.scope = parse_scope(a.scope);
  std::vector<Trajectory> runs;
  for (std::size_t r = 0; r < a.replicates; ++r) {
    RandomStream rng(seed, r);
    runs.push_back(simulate_tree(engine, a.n_gens, rng, opts));
  }
  json meta = base_meta("simulate", file, seed);
  meta["caps"] = caps_json(a.caps);
  meta["n_gens"] = a.n_gens;
  meta["replicates"] = a.replicates;
  meta["scope"] = a.scope;
  std::size_t truncated = 0, saturated = 0;
  for (const auto& t : runs) {
    truncated += t.truncated;
    saturated += t.saturated;
  }
  meta["truncated_replicates"] = truncated;
  meta["saturated_replicates"] = saturated;

  const DerivedQuantities d = derive(model);
  std::ostringstream csv;
  write_trajectory_csv(csv, {"simulate", params_hash(file.params), seed}, runs, d);
  if (g.format == "json") {
    json rows = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (const auto& s : runs[r].generations) {
        rows.push_back({{"replicate", r},
                        {"n", s.n},
                        {"G_star_A", s.G_star_A},
                        {"G_star_B", s.G_star_B},
                        {"clean_A", s.clean_A},
                        {"clean_B", to_decimal(s.clean_B)},
                        {"Z_A", to_decimal(s.Z_A)},
                        {"Z_B", to_decimal(s.Z_B)},
                        {"truncated_flag", runs[r].truncated}});
      }
    }
    meta["rows"] = rows;
    emit(g, "simulate", "json", meta.dump(2) + "\n");
  } else {
    emit(g, "simulate", "csv", csv.str());
    emit_sidecar(g, "simulate", meta);
  }
  return kOk;
}

int cmd_cell_line(const Globals& g, std::size_t n, std::size_t replicates, const std::string& start_type,
                  std::uint64_t start_z) {
  const ModelFile file = require_model(g);
  const std::uint64_t seed = require_seed(g);
  const SimEngine engine(validate(file).value());
  std::ostringstream csv;
  csv << csv_header_comment({"cell-line", params_hash(file.params), seed});
  csv << "replicate,m,type,Z,U\n";
  for (std::size_t r = 0; r < replicates; ++r) {
    RandomStream rng(seed, r);
    const CellLineTrajectory line = simulate_cell_line(engine, n, rng, {parse_type(start_type), start_z});
    for (std::size_t m = 0; m < line.steps.size(); ++m) {
      csv << r << ',' << m << ',' << to_string(line.steps[m].type) << ',' << line.steps[m].z << ','
          << (m == 0 ? std::string() : std::to_string(line.path[m - 1])) << '\n';
    }
  }
  json meta = base_meta("cell-line", file, seed);
  meta["n"] = n;
  meta["replicates"] = replicates;
  emit(g, "cell_line", "csv", csv.str());
  emit_sidecar(g, "cell_line", meta);
  return kOk;
}

int cmd_exact(const Globals& g, const std::string& process, std::size_t n, std::size_t k_max, std::size_t start_z) {
  const ModelFile file = require_model(g);
  const ValidatedModel model = validate(file).value();
  PmfVector pmf;
  if (process == "bpre_A") {
    pmf = exact_bpre_distribution(bpre_environment(model), n, k_max);
  } else if (process == "bpre_B") {
    pmf = exact_bpre_distributions(b_line_environment(model.params()), n, k_max, start_z).back();
  } else if (process == "gw_B") {
    Environment env;
    env.components.push_back({1.0, model->law_B.sum_law(), "X0(B)+X1(B)"});
    pmf = exact_bpre_distributions(env, n, k_max, start_z).back();
  } else if (process == "cell_line_A") {
    pmf = exact_cell_line_distribution(model.params(), n, k_max).conditional(CellType::A);
  } else {
    throw UsageError("unknown process '" + process + "' (bpre_A, bpre_B, gw_B, cell_line_A)");
  }
  json meta = base_meta("exact", file, std::nullopt);
  meta["process"] = process;
  meta["n"] = n;
  meta["k_max"] = k_max;
  meta["overflow_mass"] = pmf.overflow;
  meta["error_bound"] = pmf.error_bound();
  meta["residual"] = pmf.residual();
  std::ostringstream csv;
  write_pmf_csv(csv, {"exact", params_hash(file.params), std::nullopt}, pmf);
  if (g.format == "json") {
    meta["pmf"] = pmf.p;
    emit(g, "exact", "json", meta.dump(2) + "\n");
  } else {
    emit(g, "exact", "csv", csv.str());
    if (g.out.empty()) {
      std::cerr << "overflow_mass=" << format_double(pmf.overflow) << " error_bound=" << format_double(pmf.error_bound())
                << "\n";
    }
    emit_sidecar(g, "exact", meta);
  }
  return kOk;
}

struct McArgs {
  std::size_t replicates = 1000;
  std::size_t n_gens = 10;
  std::string condition = "none";
  std::size_t K_top = 10;
  std::string scope = "full";
  std::string start_type = "A";
  std::uint64_t start_z = 1;
};

int cmd_mc(const Globals& g, const McArgs& a) {
  const ModelFile file = require_model(g);
  McConfig cfg;
  cfg.master_seed = require_seed(g);
  cfg.replicates = a.replicates;
  cfg.n_gens = a.n_gens;
  try {
    cfg.condition = condition_from_string(a.condition);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.K_top = a.K_top;
  cfg.scope = parse_scope(a.scope);
  cfg.start_type = parse_type(a.start_type);
  cfg.start_z = a.start_z;
  cfg.workers = g.workers;

  const McSummary summary = run_mc(validate(file).value(), cfg);
  std::ostringstream csv;
  write_mc_csv(csv, {"mc", params_hash(file.params), cfg.master_seed}, summary);

  json meta = base_meta("mc", file, cfg.master_seed);
  meta["replicates"] = cfg.replicates;
  meta["horizon"] = cfg.n_gens;
  meta["condition"] = to_string(cfg.condition);
  meta["K_top"] = cfg.K_top;
  meta["scope"] = a.scope;
  meta["caps"] = caps_json(cfg.caps);
  meta["accepted"] = summary.accepted;
  meta["rejected"] = summary.rejected;
  meta["rejection_rate"] = summary.rejection_rate();
  meta["saturated"] = summary.saturated;
  meta["truncated"] = summary.truncated;
  meta["ci"] = cfg.replicates >= kMinReplicatesForCi ? "normal approximation, 95%" : "omitted (fewer than 1000 replicates)";
  if (g.format == "json") {
    meta["csv"] = csv.str();
    emit(g, "mc", "json", meta.dump(2) + "\n");
  } else {
    emit(g, "mc", "csv", csv.str());
    emit_sidecar(g, "mc", meta);
  }
  return kOk;
}

int cmd_verify(const Globals& g, const std::string& budget, const std::string& model_dir) {
  VerifyOptions opt;
  if (budget == "small") {
    opt.budget = Budget::small;
  } else if (budget == "full") {
    opt.budget = Budget::full;
  } else {
    throw UsageError("budget must be small or full");
  }
  opt.model_dir = model_dir;
  if (!g.model.empty()) opt.model_file = fs::path(g.model);
  if (g.seed) opt.seed = *g.seed;
  opt.workers = g.workers;
  opt.on_result = [](const CheckResult& r) { std::cout << format_result(r) << std::endl; };
  const auto results = run_verify(opt);
  std::size_t passed = 0, failed = 0, skipped = 0;
  json report = json::array();
  for (const auto& r : results) {
    if (r.status == CheckStatus::pass) ++passed;
    else if (r.status == CheckStatus::skipped) ++skipped;
    else ++failed;
    report.push_back({{"id", r.id},
                      {"name", r.name},
                      {"status", to_string(r.status)},
                      {"observed", r.observed},
                      {"expected", r.expected},
                      {"seconds", r.seconds},
                      {"retried", r.retried}});
  }
  std::cout << "summary: " << passed << " passed, " << failed << " failed, " << skipped << " skipped\n";
  if (!g.out.empty()) {
    json j = {{"tool", "hostpar"}, {"version", kToolVersion}, {"budget", budget}, {"checks", report}};
    emit(g, "verify", "json", j.dump(2) + "\n");
  }
  return all_passed(results) ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Host-parasite branching model toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Globals g;
  app.add_option("--model", g.model, "Model JSON file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory (default: stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);

  double tol = 1e-9;
  auto* classify_cmd = app.add_subcommand("classify", "Derived quantities and regime flags");
  classify_cmd->add_option("--tol", tol, "Threshold tolerance");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the cell tree");
  simulate_cmd->add_option("--generations,-n", sim.n_gens, "Generations");
  simulate_cmd->add_option("--replicates,-r", sim.replicates, "Replicates");
  simulate_cmd->add_option("--start-type", sim.start_type, "A or B");
  simulate_cmd->add_option("--start-z", sim.start_z, "Initial parasites");
  simulate_cmd->add_option("--scope", sim.scope, "full or a_only");
  simulate_cmd->add_option("--max-generations", sim.caps.max_generations, "Generation cap");
  simulate_cmd->add_option("--max-roster", sim.caps.max_roster, "Contaminated-cell cap");
  simulate_cmd->add_option("--max-parasites", sim.caps.max_parasites_per_cell, "Per-cell parasite cap");

  std::size_t line_n = 10, line_reps = 1;
  std::string line_type = "A";
  std::uint64_t line_z = 1;
  auto* line_cmd = app.add_subcommand("cell-line", "Simulate random cell lines");
  line_cmd->add_option("--generations,-n", line_n, "Generations");
  line_cmd->add_option("--replicates,-r", line_reps, "Replicates");
  line_cmd->add_option("--start-type", line_type, "A or B");
  line_cmd->add_option("--start-z", line_z, "Initial parasites");

  std::string process = "bpre_A";
  std::size_t exact_n = 1, k_max = 64, exact_z = 1;
  auto* exact_cmd = app.add_subcommand("exact", "Exact pmf of a reduced process");
  exact_cmd->add_option("--process", process, "bpre_A, bpre_B, gw_B or cell_line_A");
  exact_cmd->add_option("--generations,-n", exact_n, "Generation");
  exact_cmd->add_option("--k-max", k_max, "Truncation level");
  exact_cmd->add_option("--start-z", exact_z, "Initial parasites (bpre_B, gw_B)");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Replicated Monte Carlo summary");
  mc_cmd->add_option("--replicates,-r", mc.replicates, "Replicates");
  mc_cmd->add_option("--generations,-n", mc.n_gens, "Horizon");
  mc_cmd->add_option("--condition", mc.condition, "none, survival_A_at_n or survival_at_n");
  mc_cmd->add_option("--k-top", mc.K_top, "Largest k for F_k");
  mc_cmd->add_option("--scope", mc.scope, "full or a_only");
  mc_cmd->add_option("--start-type", mc.start_type, "A or B");
  mc_cmd->add_option("--start-z", mc.start_z, "Initial parasites");

  std::string budget = "full";
  std::string model_dir = HOSTPAR_MODEL_DIR;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance checks");
  verify_cmd->add_option("--budget", budget, "small or full");
  verify_cmd->add_option("--model-dir", model_dir, "Directory with bundled models");

  for (auto* sub : {classify_cmd, simulate_cmd, line_cmd, exact_cmd, mc_cmd, verify_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*classify_cmd) return cmd_classify(g, tol);
    if (*simulate_cmd) return cmd_simulate(g, sim);
    if (*line_cmd) return cmd_cell_line(g, line_n, line_reps, line_type, line_z);
    if (*exact_cmd) return cmd_exact(g, process, exact_n, k_max, exact_z);
    if (*mc_cmd) return cmd_mc(g, mc);
    if (*verify_cmd) return cmd_verify(g, budget, model_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
