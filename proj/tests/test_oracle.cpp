#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hostpar/oracle.hpp"
#include "hostpar/reference_models.hpp"
#include "support.hpp"

using namespace hostpar;

namespace {

ValidatedModel valid(const ModelFile& f) { return validate(f).value(); }

double max_bucket_diff(const PmfVector& a, const PmfVector& b) {
  double d = std::abs(a.overflow - b.overflow);
  for (std::size_t k = 0; k < std::max(a.p.size(), b.p.size()); ++k) d = std::max(d, std::abs(a.at(k) - b.at(k)));
  return d;
}

}  // namespace

TEST_CASE("one-step BPRE mixture on M1") {
  const PmfVector p = exact_bpre_distribution(bpre_environment(valid(reference::m1())), 1, 10);
  CHECK(p.at(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.at(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.at(2) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("BPRE mean is (gamma/nu)^n") {
  const ValidatedModel m = valid(reference::m1());
  const auto pmfs = exact_bpre_distributions(bpre_environment(m), 5, 200);
  for (std::size_t n = 0; n <= 5; ++n) {
    CHECK(pmfs[n].overflow == 0.0);
    CHECK(pmfs[n].mean_lower() == doctest::Approx(std::pow(1.1, static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("overflow mass is accounted for") {
  const ValidatedModel m = valid(reference::m1());
  const PmfVector p = exact_bpre_distribution(bpre_environment(m), 6, 8);
  CHECK(p.overflow > 0.0);
  CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-12));
  const PmfVector full = exact_bpre_distribution(bpre_environment(m), 6, 256);
  for (std::size_t k = 0; k <= 8; ++k) {
    CHECK(p.at(k) <= full.at(k) + 1e-15);
    CHECK(full.at(k) <= p.bucket_upper(k) + 1e-15);
  }
}

TEST_CASE("random A-cell line is the BPRE") {
  for (auto build : {reference::m1, reference::m3}) {
    const ValidatedModel m = valid(build());
    const auto lines = exact_cell_line_distributions(m.params(), 6, 300);
    const auto bpre = exact_bpre_distributions(bpre_environment(m), 6, 300);
    const double half_nu = derive(m).nu / 2;
    for (std::size_t n = 0; n <= 6; ++n) {
      CHECK(max_bucket_diff(lines[n].conditional(CellType::A), bpre[n]) < 1e-12);
      CHECK(lines[n].prob_type(CellType::A) == doctest::Approx(std::pow(half_nu, static_cast<double>(n))).epsilon(1e-13));
      CHECK(lines[n].residual() < 1e-12);
    }
  }
}

TEST_CASE("random models: cell line identity and type probability") {
  std::mt19937_64 gen(4);
  for (int i = 0; i < 10; ++i) {
    const Validation v = validate(testing::random_model(gen));
    REQUIRE(v.ok());
    const auto lines = exact_cell_line_distributions(v.value().params(), 4, 120);
    const auto bpre = exact_bpre_distributions(bpre_environment(v.value()), 4, 120);
    const double half_nu = derive(v.value()).nu / 2;
    for (std::size_t n = 0; n <= 4; ++n) {
      CHECK(max_bucket_diff(lines[n].conditional(CellType::A), bpre[n]) < 1e-12);
      CHECK(lines[n].prob_type(CellType::A) == doctest::Approx(std::pow(half_nu, static_cast<double>(n))).epsilon(1e-12));
    }
  }
}

TEST_CASE("brute-force tree agrees with the BPRE and the cell line") {
  const ValidatedModel m = valid(reference::m1());
  const TreeOutcomeTable t = brute_force_tree(m.params(), 3);
  const auto bpre = exact_bpre_distributions(bpre_environment(m), 3, 64);
  const auto lines = exact_cell_line_distributions(m.params(), 3, 64);
  for (std::size_t n = 0; n <= 3; ++n) {
    CHECK(t.total_probability(n) == doctest::Approx(1.0).epsilon(1e-13));
    for (std::uint64_t k = 0; k <= 8; ++k) {
      CHECK(std::pow(1.25, -static_cast<double>(n)) * t.expected_count(n, CellType::A, k) ==
            doctest::Approx(bpre[n].at(k)).epsilon(1e-12));
    }
    // every cell in generation n, averaged: the law of a uniform random cell line
    const CellLinePmf marg = t.cell_line_marginal(n, 64);
    CHECK(max_bucket_diff(marg.a, lines[n].a) < 1e-12);
    CHECK(max_bucket_diff(marg.b, lines[n].b) < 1e-12);
    // cell counts
    CHECK(t.expected_cells(n, CellType::A) == doctest::Approx(std::pow(1.25, static_cast<double>(n))));
    CHECK(t.expected_parasites(n, CellType::A) == doctest::Approx(std::pow(1.375, static_cast<double>(n))));
  }
}

TEST_CASE("brute-force B-parasite mean") {
  const ValidatedModel m = valid(reference::m1());
  const TreeOutcomeTable t = brute_force_tree(m.params(), 3, {3, 10'000'000, {CellType::B, 2}});
  for (std::size_t n = 0; n <= 3; ++n) {
    CHECK(t.expected_parasites(n, CellType::B) == doctest::Approx(2 * std::pow(2.0, static_cast<double>(n))));
    CHECK(t.expected_cells(n, CellType::A) == 0.0);
  }
}

TEST_CASE("brute-force budget") {
  const ValidatedModel m = valid(reference::m3());
  CHECK_THROWS_AS(brute_force_tree(m.params(), 3, {3, 1000, {}}), BudgetExceeded);
  CHECK_THROWS(brute_force_tree(m.params(), 4));
}

TEST_CASE("Galton-Watson extinction probability") {
  PmfVector law(2);
  law.p = {0.25, 0.0, 0.75};
  const GwExtinction q = gw_extinction_prob(law);
  CHECK(std::abs(q.q - 1.0 / 3.0) < 1e-12);
  CHECK(generating_function(law, q.q) == doctest::Approx(q.q).epsilon(1e-13));

  PmfVector sub(2);
  sub.p = {0.5, 0.3, 0.2};
  CHECK(gw_extinction_prob(sub).q == 1.0);

  PmfVector delta(1);
  delta.p = {0.0, 1.0};
  const GwExtinction d = gw_extinction_prob(delta);
  CHECK(d.degenerate);
  CHECK(d.q == 0.0);
}

TEST_CASE("Yaglom proxy on M3") {
  const ValidatedModel m = valid(reference::m3());
  const YaglomProxy y = yaglom_proxy_B(m.params(), 25, 400);
  CHECK(total_variation(y.conditional[20], y.conditional[25]) < 1e-3);
  for (std::size_t n = 1; n <= 25; ++n) {
    CHECK(y.conditional[n].at(0) == 0.0);
    CHECK(y.conditional[n].total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y.survival[n] <= y.survival[n - 1] + 1e-15);
  }
  CHECK(y.tv_successive[25] < y.tv_successive[5]);
}

TEST_CASE("truncated convolution") {
  const std::vector<double> a{0.5, 0.5}, b{0.25, 0.75};
  const auto c = convolve_truncated(a, b, 5);
  CHECK(c[0] == doctest::Approx(0.125));
  CHECK(c[1] == doctest::Approx(0.5));
  CHECK(c[2] == doctest::Approx(0.375));
  ConvolutionPowers pw({0.5, 0.5}, 3);
  const auto p4 = pw.power(4);
  CHECK(p4[0] == doctest::Approx(1.0 / 16));
  CHECK(p4[3] == doctest::Approx(4.0 / 16));
}
