#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hostpar/oracle.hpp"
#include "hostpar/reference_models.hpp"
#include "hostpar/sim.hpp"

using namespace hostpar;

namespace {

ValidatedModel valid(const ModelFile& f) { return validate(f).value(); }

struct Mean {
  double s = 0, s2 = 0, n = 0;
  void add(double x) {
    s += x;
    s2 += x * x;
    n += 1;
  }
  double mean() const { return s / n; }
  double se() const { return std::sqrt((s2 / n - mean() * mean()) / (n - 1)); }
};

}  // namespace

TEST_CASE("zero generations is the initial state") {
  const ValidatedModel m = valid(reference::m1());
  const Trajectory t = simulate_tree(m, 0, 1);
  REQUIRE(t.generations.size() == 1);
  const auto& g = t.generations[0];
  CHECK(g.G_star_A == 1);
  CHECK(g.Z_A == 1);
  CHECK(g.G_star_B == 0);
  CHECK(g.clean_A == 0);
  CHECK(g.clean_B == 0);
}

TEST_CASE("same seed, same trajectory") {
  const ValidatedModel m = valid(reference::m1());
  const Trajectory a = simulate_tree(m, 12, 99), b = simulate_tree(m, 12, 99);
  REQUIRE(a.generations.size() == b.generations.size());
  for (std::size_t n = 0; n < a.generations.size(); ++n) {
    CHECK(a.generations[n].Z_A == b.generations[n].Z_A);
    CHECK(a.generations[n].Z_B == b.generations[n].Z_B);
    CHECK(a.generations[n].clean_B == b.generations[n].clean_B);
  }
}

TEST_CASE("cell counts and type monotonicity") {
  const ValidatedModel m = valid(reference::m3());
  const SimEngine engine(m);
  for (std::uint64_t r = 0; r < 200; ++r) {
    RandomStream rng(5, r);
    const Trajectory t = simulate_tree(engine, 12, rng);
    for (const auto& g : t.generations) {
      const u128 cells = static_cast<u128>(g.G_star_A) + g.clean_A + g.G_star_B + g.clean_B;
      CHECK(cells == (static_cast<u128>(1) << g.n));
    }
    RandomStream rng_b(6, r);
    const Trajectory tb = simulate_tree(engine, 8, rng_b, {CellType::B, 3});
    for (const auto& g : tb.generations) {
      CHECK(g.G_star_A == 0);
      CHECK(g.clean_A == 0);
    }
  }
}

TEST_CASE("tree means against brute-force expectations") {
  const ValidatedModel m = valid(reference::m3());
  const TreeOutcomeTable table = brute_force_tree(m.params(), 2);
  const SimEngine engine(m);
  const int reps = 40000;
  std::vector<Mean> gA(3), zA(3), gB(3), zB(3), cA(3);
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(17, r);
    const Trajectory t = simulate_tree(engine, 2, rng);
    for (std::size_t n = 0; n <= 2; ++n) {
      const auto& g = t.generations[n];
      gA[n].add(static_cast<double>(g.G_star_A));
      zA[n].add(to_double(g.Z_A));
      gB[n].add(static_cast<double>(g.G_star_B));
      zB[n].add(to_double(g.Z_B));
      cA[n].add(static_cast<double>(g.clean_A));
    }
  }
  for (std::size_t n = 1; n <= 2; ++n) {
    CHECK(std::abs(gA[n].mean() - table.expected_contaminated(n, CellType::A)) < 4 * gA[n].se());
    CHECK(std::abs(zA[n].mean() - table.expected_parasites(n, CellType::A)) < 4 * zA[n].se());
    CHECK(std::abs(gB[n].mean() - table.expected_contaminated(n, CellType::B)) < 4 * gB[n].se());
    CHECK(std::abs(zB[n].mean() - table.expected_parasites(n, CellType::B)) < 4 * zB[n].se());
    CHECK(std::abs(cA[n].mean() - table.expected_count(n, CellType::A, 0)) < 4 * cA[n].se());
  }
}

TEST_CASE("large parasite counts use the multinomial path without bias") {
  // B-line mean per generation: each B parasite yields 2 in total for M1
  const ValidatedModel m = valid(reference::m1());
  SimCaps caps;
  caps.explicit_sum_limit = 4;
  const SimEngine engine(m, caps);
  for (std::uint64_t r = 0; r < 50; ++r) {
    RandomStream rng(8, r);
    const Trajectory t = simulate_tree(engine, 6, rng, {CellType::B, 100});
    for (const auto& g : t.generations) CHECK(g.Z_B == (static_cast<u128>(100) << g.n));
  }
}

TEST_CASE("caps: saturation and roster truncation") {
  const ValidatedModel m = valid(reference::m1());
  SimCaps small;
  small.max_parasites_per_cell = 50;
  const SimEngine sat(m, small);
  RandomStream rng(1, 0);
  const Trajectory t = simulate_tree(sat, 10, rng, {CellType::B, 40});
  CHECK(t.saturated);
  CHECK_FALSE(t.truncated);

  SimCaps roster;
  roster.max_roster = 8;
  const SimEngine cut(m, roster);
  RandomStream rng2(1, 0);
  const Trajectory tr = simulate_tree(cut, 10, rng2, {CellType::B, 4});
  CHECK(tr.truncated);
  CHECK(tr.halt == HaltReason::roster_cap);
  CHECK(tr.generations.size() < 11);

  CHECK_THROWS_AS(simulate_tree(m, 41, 1), std::invalid_argument);
}

TEST_CASE("a_only scope keeps A statistics and drops B cells") {
  const ValidatedModel m = valid(reference::m1());
  const TreeOutcomeTable table = brute_force_tree(m.params(), 3);
  const SimEngine engine(m);
  Mean z;
  for (int r = 0; r < 40000; ++r) {
    RandomStream rng(21, r);
    const Trajectory t = simulate_tree(engine, 3, rng, {CellType::A, 1, SimScope::a_only});
    for (const auto& g : t.generations) {
      CHECK(g.G_star_B == 0);
      CHECK(g.clean_B == 0);
    }
    z.add(to_double(t.generations[3].Z_A));
  }
  CHECK(std::abs(z.mean() - table.expected_parasites(3, CellType::A)) < 4 * z.se());
}

TEST_CASE("cell line type probability") {
  const ValidatedModel m = valid(reference::m1());
  const SimEngine engine(m);
  const int reps = 100000;
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(2, r);
    const CellLineTrajectory line = simulate_cell_line(engine, 4, rng);
    REQUIRE(line.steps.size() == 5);
    hits += line.steps[4].type == CellType::A;
    for (std::size_t i = 1; i < line.steps.size(); ++i) {
      if (line.steps[i - 1].type == CellType::B) CHECK(line.steps[i].type == CellType::B);
    }
  }
  const double p = std::pow(0.625, 4);
  CHECK(std::abs(hits / double(reps) - p) < 4 * std::sqrt(p * (1 - p) / reps));
}

TEST_CASE("reduced processes against exact pmfs") {
  const ValidatedModel m = valid(reference::m1());
  const auto exact = exact_bpre_distributions(bpre_environment(m), 4, 64);
  const int reps = 100000;
  std::vector<double> freq(20, 0.0);
  const BpreSampler sampler(bpre_environment(m), SimCaps{}.max_parasites_per_cell);
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(31, r);
    const ZPath p = sampler.run(4, 1, rng);
    if (p.z[4] < freq.size()) freq[p.z[4]] += 1;
  }
  for (std::size_t k = 0; k < 8; ++k) {
    const double q = exact[4].at(k);
    CHECK(std::abs(freq[k] / reps - q) < 4 * std::sqrt(q * (1 - q) / reps) + 1e-12);
  }
  const ZPath gw = simulate_gw_B(valid(reference::gw_test()), 10, 3, 1);
  for (std::uint64_t z : gw.z) CHECK(z % 2 == (z == 1 ? 1 : 0));
}
