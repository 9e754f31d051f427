#include "hostpar/verify.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "hostpar/io.hpp"
#include "hostpar/mc.hpp"
#include "hostpar/oracle.hpp"

namespace hostpar {

namespace {

struct Outcome {
  bool pass = false;
  std::string observed;
  std::string expected;
};

struct CheckDef {
  int id;
  const char* name;
  double time_limit;
  bool stochastic;
  bool in_small;
  std::function<Outcome(std::uint64_t seed)> run;
};

std::string num(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

constexpr std::size_t kReplicates = 100'000;

class Suite {
 public:
  explicit Suite(const VerifyOptions& o) : opt_(o) {}

  std::vector<CheckResult> run();

 private:
  ValidatedModel load(const std::string& file) const {
    const ModelFile f = load_model(opt_.model_dir / file);
    return validate(f).value();
  }
  ModelFile generic_file() const {
    return load_model(opt_.model_file ? *opt_.model_file : opt_.model_dir / "m1.json");
  }
  ValidatedModel generic() const { return validate(generic_file()).value(); }

  const McSummary& means_run(std::uint64_t seed);
  const McSummary& decay_run(std::size_t n, std::uint64_t seed);

  Outcome prop21();
  Outcome prop22();
  Outcome type_probability(std::uint64_t seed);
  Outcome mean_identities(std::uint64_t seed);
  Outcome extinction(std::uint64_t seed);
  Outcome gw_fixed_point(std::uint64_t seed);
  Outcome phi_minimization();
  Outcome proportion_decay(std::uint64_t seed);
  Outcome fk_decay(std::uint64_t seed);
  Outcome yaglom(std::uint64_t seed);
  Outcome martingale_direction(std::uint64_t seed);
  Outcome determinism(std::uint64_t seed);

  McConfig base_config(std::uint64_t seed) const {
    McConfig c;
    c.replicates = kReplicates;
    c.master_seed = seed;
    c.workers = opt_.workers;
    return c;
  }

  const VerifyOptions& opt_;
  std::map<std::uint64_t, McSummary> means_cache_;
  std::map<std::pair<std::size_t, std::uint64_t>, McSummary> decay_cache_;
};

const McSummary& Suite::means_run(std::uint64_t seed) {
  auto it = means_cache_.find(seed);
  if (it != means_cache_.end()) return it->second;
  McConfig c = base_config(seed);
  c.n_gens = 10;
  return means_cache_.emplace(seed, run_mc(generic(), c)).first->second;
}

const McSummary& Suite::decay_run(std::size_t n, std::uint64_t seed) {
  const auto key = std::make_pair(n, seed);
  auto it = decay_cache_.find(key);
  if (it != decay_cache_.end()) return it->second;
  McConfig c = base_config(seed + n);
  c.n_gens = n;
  c.condition = Condition::survival_A_at_n;
  return decay_cache_.emplace(key, run_mc(load("m1.json"), c)).first->second;
}

Outcome Suite::prop21() {
  const ValidatedModel m = generic();
  const Environment env = bpre_environment(m);
  constexpr std::size_t k_max = 256;
  const auto lines = exact_cell_line_distributions(m.params(), 6, k_max);
  const auto bpre = exact_bpre_distributions(env, 6, k_max);
  double worst = 0.0;
  for (std::size_t n = 0; n <= 6; ++n) {
    const PmfVector cond = lines[n].conditional(CellType::A);
    for (std::size_t k = 0; k <= k_max; ++k) worst = std::max(worst, std::abs(cond.at(k) - bpre[n].at(k)));
    worst = std::max(worst, std::abs(cond.overflow - bpre[n].overflow));
  }
  return {worst <= 1e-12, "max bucket diff " + num(worst), "<= 1e-12 for n <= 6"};
}

Outcome Suite::prop22() {
  const ValidatedModel m = generic();
  const double nu = derive(m).nu;
  const TreeOutcomeTable table = brute_force_tree(m.params(), 3);
  const auto bpre = exact_bpre_distributions(bpre_environment(m), 3, 64);
  double worst = 0.0;
  for (std::size_t n = 0; n <= 3; ++n) {
    for (std::size_t k = 0; k <= 8; ++k) {
      const double lhs = std::pow(nu, -static_cast<double>(n)) * table.expected_count(n, CellType::A, k);
      worst = std::max(worst, std::abs(lhs - bpre[n].at(k)));
    }
  }
  return {worst <= 1e-10, "max diff " + num(worst) + " over n <= 3, k <= 8", "<= 1e-10"};
}

Outcome Suite::type_probability(std::uint64_t seed) {
  const ValidatedModel m = generic();
  const double half_nu = derive(m).nu / 2.0;
  const auto lines = exact_cell_line_distributions(m.params(), 10, 64);
  double worst = 0.0;
  for (std::size_t n = 0; n <= 10; ++n) {
    worst = std::max(worst, std::abs(lines[n].prob_type(CellType::A) - std::pow(half_nu, static_cast<double>(n))));
  }
  const double target = std::pow(half_nu, 4.0);
  const Estimate e = run_cell_line_mc(m, 4, kReplicates, seed, opt_.workers).prob_type_A(4);
  const bool ok = worst <= 1e-12 && e.within_sigma(target);
  return {ok, "exact max diff " + num(worst) + "; MC P(T_[4]=A) = " + num(e.value) + " (z " + num(e.z_score(target), 3) + ")",
          "exact <= 1e-12; MC within 3 sigma of " + num(target)};
}

Outcome Suite::mean_identities(std::uint64_t seed) {
  const McSummary& s = means_run(seed);
  const double ratio = s.derived.gamma / s.derived.nu;
  // Z_n(A) is the A-line BPRE started from one parasite.
  const PathStats bpre = run_path_mc(generic(), ReducedProcess::bpre_A, 10, kReplicates, seed + 1, opt_.workers);
  double worst = 0.0;
  std::string where;
  auto consider = [&](const Estimate& e, double target, const std::string& label) {
    const double z = e.z_score(target);
    if (z > worst || !e.defined) {
      worst = e.defined ? z : std::numeric_limits<double>::infinity();
      where = label;
    }
  };
  for (std::size_t n = 0; n <= 10; ++n) {
    const std::string at = " at n=" + std::to_string(n);
    consider(track_mean(s, n, Track::W), 1.0, "W_n" + at);
    consider(track_mean(s, n, Track::GA), 1.0, "nu^-n #G_n(A)" + at);
    consider(bpre.mean(n), std::pow(ratio, static_cast<double>(n)), "Z_n(A)" + at);
  }
  return {worst <= 3.0, "max |z| = " + num(worst, 3) + " (" + where + ")", "all within 3 SE for n <= 10"};
}

Outcome Suite::extinction(std::uint64_t seed) {
  McConfig c = base_config(seed);
  c.n_gens = 30;
  c.scope = SimScope::a_only;
  const ValidatedModel m2 = load("m2.json");
  const ValidatedModel m1 = load("m1.json");
  const bool m2_ext = classify(m2).a_parasites_as_extinction;
  const bool m1_ext = classify(m1).a_parasites_as_extinction;
  const double f2 = survival_frequency(run_mc(m2, c), 30, false).value;
  c.master_seed = seed + 1;
  const double f1 = survival_frequency(run_mc(m1, c), 30, false).value;
  const bool ok = m2_ext && !m1_ext && f2 < 0.01 && f1 > 0.05;
  return {ok,
          "M2 freq " + num(f2) + " (classified extinct: " + (m2_ext ? "yes" : "no") + "), M1 freq " + num(f1) +
              " (classified extinct: " + (m1_ext ? "yes" : "no") + ")",
          "M2 < 0.01 and extinct; M1 > 0.05 and not extinct"};
}

Outcome Suite::gw_fixed_point(std::uint64_t seed) {
  const ValidatedModel m = load("gw_test.json");
  PmfVector sum_law(2);
  const std::vector<double> law = m->law_B.sum_law();
  for (std::size_t k = 0; k < law.size() && k <= 2; ++k) sum_law.p[k] = law[k];
  const bool law_ok = law.size() == 3 && std::abs(law[0] - 0.25) < 1e-15 && law[1] == 0.0 &&
                      std::abs(law[2] - 0.75) < 1e-15;
  const double q = gw_extinction_prob(sum_law).q;
  const PathStats paths = run_path_mc(m, ReducedProcess::gw_B, 50, kReplicates, seed, opt_.workers, 1);
  const Estimate surv = paths.survival(50);
  Estimate ext = surv;
  ext.value = 1.0 - surv.value;
  const bool ok = law_ok && std::abs(q - 1.0 / 3.0) <= 1e-10 && ext.within_sigma(1.0 / 3.0);
  return {ok, "q = " + num(q, 15) + "; MC extinction by n=50 " + num(ext.value) + " (z " + num(ext.z_score(1.0 / 3.0), 3) + ")",
          "q = 1/3 within 1e-10; MC within 3 sigma"};
}

Outcome Suite::phi_minimization() {
  const ValidatedModel m = load("m2.json");
  const PhiMinimum pm = minimize_phi(m);
  const double phi1 = phi(m, 1.0);
  const RegimeReport r = classify(m);
  const bool ok = std::abs(pm.phi_min - 0.5) <= 1e-8 && std::abs(pm.theta_star - 1.0) <= 1e-8 &&
                  r.bpre_class == BpreClass::subcritical_strong && std::abs(pm.phi_min - phi1) <= 1e-8;
  return {ok,
          "phi_min " + num(pm.phi_min, 12) + " at theta " + num(pm.theta_star, 12) + ", phi(1) " + num(phi1, 12) +
              ", class " + to_string(r.bpre_class),
          "phi_min = phi(1) = 0.5 at theta = 1 within 1e-8, strongly subcritical"};
}

Outcome Suite::proportion_decay(std::uint64_t seed) {
  const Estimate p6 = proportion_A(decay_run(6, seed), 6);
  const Estimate p12 = proportion_A(decay_run(12, seed), 12);
  const double se = std::hypot(p6.se, p12.se);
  const bool ok = p6.value - p12.value > 3.0 * se;
  return {ok, "proportion_A(6) " + num(p6.value) + ", proportion_A(12) " + num(p12.value) + ", diff/se " +
                  num((p6.value - p12.value) / se, 3),
          "n=12 below n=6 by more than 3 sigma"};
}

Outcome Suite::fk_decay(std::uint64_t seed) {
  auto sum12 = [&](const McSummary& s, std::size_t n) {
    const Estimate f1 = estimate_Fk(s, n, 1, CellType::A);
    const Estimate f2 = estimate_Fk(s, n, 2, CellType::A);
    return std::pair{f1.value + f2.value, f1.se + f2.se};
  };
  const auto [v6, se6] = sum12(decay_run(6, seed), 6);
  const auto [v12, se12] = sum12(decay_run(12, seed), 12);
  const double se = std::hypot(se6, se12);
  const bool ok = v6 - v12 > 3.0 * se;
  return {ok, "F1+F2 at n=6 " + num(v6) + ", at n=12 " + num(v12) + ", diff/se " + num((v6 - v12) / se, 3),
          "n=12 below n=6 by more than 3 sigma"};
}

Outcome Suite::yaglom(std::uint64_t seed) {
  const ValidatedModel m = load("m3.json");
  const bool applies = classify(m).thm32c_applies;
  const YaglomComparison y = yaglom_compare(m, base_config(seed), 15, 10);
  const YaglomProxy proxy = yaglom_proxy_B(m.params(), 25, 400);
  const double tv = total_variation(proxy.conditional[20], proxy.conditional[25]);
  const bool ok = applies && y.max_diff < 0.05 && tv < 1e-3;
  return {ok,
          "max_k |F_k(15,B) - proxy| " + num(y.max_diff) + ", TV(20,25) " + num(tv) + ", rejection rate " +
              num(y.rejection_rate, 3) + (applies ? "" : ", thm32c does not apply"),
          "< 0.05 and TV < 1e-3 on a model where thm32c applies"};
}

Outcome Suite::martingale_direction(std::uint64_t seed) {
  const McSummary& s = means_run(seed);
  double worst_wb = -1e300, worst_la = -1e300;
  for (std::size_t n = 1; n <= 10; ++n) {
    const Estimate wb0 = track_mean(s, n - 1, Track::WB), wb1 = track_mean(s, n, Track::WB);
    const Estimate la0 = track_mean(s, n - 1, Track::LA), la1 = track_mean(s, n, Track::LA);
    const double se_wb = std::hypot(wb0.se, wb1.se), se_la = std::hypot(la0.se, la1.se);
    // drops in units of the difference's standard error
    if (wb0.value > wb1.value) worst_wb = std::max(worst_wb, se_wb > 0 ? (wb0.value - wb1.value) / se_wb : 1e300);
    if (la1.value > la0.value) worst_la = std::max(worst_la, se_la > 0 ? (la1.value - la0.value) / se_la : 1e300);
  }
  const bool ok = worst_wb <= 3.0 && worst_la <= 3.0;
  auto show = [](double x) { return x < -1e299 ? std::string("none") : num(x, 3) + " sigma"; };
  return {ok, "largest WB_n decrease " + show(worst_wb) + ", largest LA_n increase " + show(worst_la),
          "WB_n non-decreasing and LA_n non-increasing up to 3 sigma, n <= 10"};
}

Outcome Suite::determinism(std::uint64_t seed) {
  const ModelFile f = generic_file();
  McConfig c;
  c.replicates = 20'000;
  c.n_gens = 10;
  c.master_seed = seed;
  std::string first;
  bool same = true;
  for (std::size_t w : {1, 4, 16}) {
    c.workers = w;
    const std::string csv = mc_csv(f, c);
    if (first.empty()) {
      first = csv;
    } else {
      same = same && csv == first;
    }
  }
  return {same, same ? "identical (" + std::to_string(first.size()) + " bytes)" : "outputs differ",
          "byte-identical CSV for workers 1, 4, 16"};
}

std::vector<CheckResult> Suite::run() {
  const std::vector<CheckDef> checks{
      {1, "cell_line_vs_bpre_exact", 1, false, true, [&](auto) { return prop21(); }},
      {2, "brute_force_tree_vs_bpre", 30, false, true, [&](auto) { return prop22(); }},
      {3, "type_A_probability", 10, true, true, [&](auto s) { return type_probability(s); }},
      {4, "mean_identities", 60, true, false, [&](auto s) { return mean_identities(s); }},
      {5, "extinction_vs_simulation", 120, true, false, [&](auto s) { return extinction(s); }},
      {6, "gw_fixed_point", 10, true, true, [&](auto s) { return gw_fixed_point(s); }},
      {7, "phi_minimization", 1, false, true, [&](auto) { return phi_minimization(); }},
      {8, "proportion_A_decay", 120, true, false, [&](auto s) { return proportion_decay(s); }},
      {9, "F1_F2_A_decay", 120, true, false, [&](auto s) { return fk_decay(s); }},
      {10, "yaglom_comparison", 300, true, false, [&](auto s) { return yaglom(s); }},
      {11, "martingale_directions", 60, true, false, [&](auto s) { return martingale_direction(s); }},
      {12, "worker_determinism", 60, false, true, [&](auto s) { return determinism(s); }},
  };

  std::vector<CheckResult> results;
  for (const CheckDef& def : checks) {
    CheckResult r;
    r.id = def.id;
    r.name = def.name;
    r.time_limit = def.time_limit;
    if (opt_.budget == Budget::small && !def.in_small) {
      r.status = CheckStatus::skipped;
      r.observed = "skipped (budget=small)";
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      auto attempt = [&](std::uint64_t seed) {
        try {
          const Outcome o = def.run(seed);
          r.status = o.pass ? CheckStatus::pass : CheckStatus::fail;
          r.observed = o.observed;
          r.expected = o.expected;
        } catch (const std::exception& e) {
          r.status = CheckStatus::error;
          r.observed = std::string("error: ") + e.what();
        }
      };
      attempt(opt_.seed);
      if (def.stochastic && r.status == CheckStatus::fail) {
        r.retried = true;
        attempt(opt_.seed + 7919 * static_cast<std::uint64_t>(def.id));
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (r.status == CheckStatus::pass && r.seconds > r.time_limit) {
        r.status = CheckStatus::fail;
        r.observed += "; runtime " + num(r.seconds, 3) + " s exceeds " + num(r.time_limit) + " s";
      }
    }
    if (opt_.on_result) opt_.on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skipped: return "SKIP";
    case CheckStatus::error: return "ERROR";
  }
  return "?";
}

std::vector<CheckResult> run_verify(const VerifyOptions& options) { return Suite(options).run(); }

std::string format_result(const CheckResult& r) {
  std::ostringstream s;
  s << '[' << to_string(r.status) << "] " << r.id << ' ' << r.name << ": " << r.observed;
  if (!r.expected.empty()) s << " | expected " << r.expected;
  if (r.status != CheckStatus::skipped) {
    s.precision(3);
    s << std::fixed << " (" << r.seconds << " s" << (r.retried ? ", retried" : "") << ')';
  }
  return s.str();
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (r.status == CheckStatus::fail || r.status == CheckStatus::error) return false;
  }
  return true;
}

}  // namespace hostpar
