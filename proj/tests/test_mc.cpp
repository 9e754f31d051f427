#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hostpar/io.hpp"
#include "hostpar/mc.hpp"
#include "hostpar/oracle.hpp"
#include "hostpar/reference_models.hpp"

using namespace hostpar;

namespace {

ValidatedModel valid(const ModelFile& f) { return validate(f).value(); }

}  // namespace

TEST_CASE("moment accumulators") {
  Moments m;
  for (double x : {1.0, 2.0, 3.0, 4.0}) m.add(x);
  CHECK(m.mean() == 2.5);
  CHECK(m.variance() == doctest::Approx(5.0 / 3.0));
  const Estimate e = m.estimate();
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4)));
  CHECK(std::isnan(e.ci_lo));  // fewer than 1000 replicates

  Moments a, b, all;
  for (int i = 0; i < 1500; ++i) {
    const double x = std::sin(i * 0.37);
    (i < 700 ? a : b).add(x);
    all.add(x);
  }
  a.merge(b);
  CHECK(a.mean() == doctest::Approx(all.mean()));
  const Estimate ea = a.estimate();
  CHECK(ea.ci_lo == doctest::Approx(ea.value - 1.96 * ea.se));

  RatioMoments r;
  r.add(1, 2);
  r.add(3, 4);
  r.add(0, 1);
  const Estimate re = r.estimate();
  CHECK(re.value == doctest::Approx(4.0 / 7.0));
  // delta method: residuals N - R D
  const double R = 4.0 / 7.0;
  const double res = std::pow(1 - 2 * R, 2) + std::pow(3 - 4 * R, 2) + std::pow(0 - R, 2);
  CHECK(re.se == doctest::Approx(std::sqrt(res / 2 / 3) / (7.0 / 3)));

  const Estimate p = proportion_estimate(30, 100);
  CHECK(p.value == 0.3);
  CHECK(p.se == doctest::Approx(std::sqrt(0.21 / 100)));
  CHECK(p.within_sigma(0.3 + 2.9 * p.se));
  CHECK_FALSE(p.within_sigma(0.3 + 3.1 * p.se));
}

TEST_CASE("summary does not depend on the worker count") {
  const ModelFile f = reference::m1();
  McConfig cfg;
  cfg.replicates = 3000;
  cfg.n_gens = 8;
  cfg.master_seed = 77;
  cfg.condition = Condition::survival_A_at_n;
  std::string first;
  for (std::size_t w : {1, 4, 16}) {
    cfg.workers = w;
    const std::string csv = mc_csv(f, cfg);
    if (first.empty()) first = csv;
    CHECK(csv == first);
  }
}

TEST_CASE("mean identities at desk scale") {
  const ValidatedModel m = valid(reference::m3());
  McConfig cfg;
  cfg.replicates = 20000;
  cfg.n_gens = 8;
  cfg.master_seed = 5;
  const McSummary s = run_mc(m, cfg);
  CHECK(s.accepted == cfg.replicates);
  for (std::size_t n = 0; n <= 8; ++n) {
    CHECK(track_mean(s, n, Track::W).z_score(1.0) < 4);
    CHECK(track_mean(s, n, Track::GA).z_score(1.0) < 4);
    CHECK(track_mean(s, n, Track::Z_A).z_score(std::pow(s.derived.gamma, double(n))) < 4);
  }
  // nested events: exactly non-increasing
  for (std::size_t n = 1; n <= 8; ++n) {
    CHECK(survival_frequency(s, n, false).value <= survival_frequency(s, n - 1, false).value);
  }
}

TEST_CASE("tree counts against the BPRE (nu^n-scaled frequencies)") {
  const ValidatedModel m = valid(reference::m1());
  const double nu = 1.25;
  const std::size_t n = 4, reps = 40000;
  const PathStats bpre = run_path_mc(m, ReducedProcess::bpre_A, n, reps, 3);
  const SimEngine engine(m);
  std::vector<double> s(9, 0.0), s2(9, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(4, r);
    const Trajectory t = simulate_tree(engine, n, rng, {CellType::A, 1, SimScope::a_only, 8});
    for (std::size_t k = 1; k <= 8; ++k) {
      const double c = static_cast<double>(t.generations[n].count_A[k - 1]);
      s[k] += c;
      s2[k] += c * c;
    }
  }
  for (std::size_t k = 1; k <= 8; ++k) {
    const double mean = s[k] / reps;
    const double se_tree = std::sqrt((s2[k] / reps - mean * mean) / reps);
    const Estimate f = bpre.pmf(n, k);
    const double lhs = std::pow(nu, double(n)) * f.value;
    const double se = std::hypot(std::pow(nu, double(n)) * f.se, se_tree);
    CHECK(std::abs(lhs - mean) < 3.5 * se + 1e-12);
  }
}

TEST_CASE("conditioning by rejection") {
  const ValidatedModel m2 = valid(reference::m2());
  McConfig cfg;
  cfg.replicates = 200;
  cfg.n_gens = 30;
  cfg.scope = SimScope::a_only;
  cfg.condition = Condition::survival_A_at_n;
  CHECK_THROWS_AS(run_mc(m2, cfg), AllRejected);

  const ValidatedModel m1 = valid(reference::m1());
  cfg.n_gens = 6;
  cfg.replicates = 2000;
  cfg.scope = SimScope::full;
  const McSummary s = run_mc(m1, cfg);
  CHECK(s.accepted + s.rejected == s.replicates_run);
  CHECK(s.rejection_rate() > 0.0);
  CHECK(survival_frequency(s, 6, false).value == 1.0);
  CHECK_THROWS_AS(estimate_Fk(s, 6, 11, CellType::A), std::out_of_range);

  cfg.scope = SimScope::a_only;
  const McSummary a = run_mc(m1, cfg);
  CHECK_FALSE(a.b_tracked());
  CHECK_THROWS(proportion_A(a, 6));
  CHECK_FALSE(survival_frequency(a, 6, true).defined);
}

TEST_CASE("proportion of A-cells falls on M1") {
  const ValidatedModel m = valid(reference::m1());
  McConfig cfg;
  cfg.replicates = 5000;
  cfg.condition = Condition::survival_A_at_n;
  cfg.n_gens = 4;
  const Estimate p4 = proportion_A(run_mc(m, cfg), 4);
  cfg.n_gens = 10;
  cfg.master_seed = 2;
  const Estimate p10 = proportion_A(run_mc(m, cfg), 10);
  CHECK(p4.value - p10.value > 3 * std::hypot(p4.se, p10.se));
}

TEST_CASE("B-started cell line: (mu_B/2)^-n Z_[n] has mean 1") {
  const ValidatedModel m = valid(reference::m3());
  const double half_muB = derive(m).mu_B / 2;
  const CellLineStats st = run_cell_line_mc(m, 10, 50000, 8, 2, {CellType::B, 1});
  for (std::size_t n = 0; n <= 10; ++n) {
    Estimate e = st.z[n].estimate();
    e.value *= std::pow(half_muB, -double(n));
    e.se *= std::pow(half_muB, -double(n));
    CHECK(e.z_score(1.0) < 4);
    CHECK(st.prob_type_A(n).value == 0.0);
  }
}

TEST_CASE("cell line conditional law matches the exact recursion") {
  const ValidatedModel m = valid(reference::m1());
  const CellLineStats st = run_cell_line_mc(m, 3, 100000, 12);
  const CellLinePmf exact = exact_cell_line_distribution(m.params(), 3, 64);
  CHECK(st.prob_type_A(3).z_score(exact.prob_type(CellType::A)) < 4);
  const PmfVector cond = exact.conditional(CellType::A);
  for (std::size_t k = 0; k <= 6; ++k) CHECK(st.conditional_pmf_A(3, k).z_score(cond.at(k)) < 4);
}

TEST_CASE("Yaglom comparison helper") {
  const ValidatedModel m = valid(reference::m3());
  McConfig cfg;
  cfg.replicates = 20000;
  cfg.master_seed = 9;
  const YaglomComparison y = yaglom_compare(m, cfg, 12, 10);
  CHECK(y.thm32c_applies);
  CHECK(y.rows.size() == 10);
  CHECK(y.max_diff < 0.05);
}
