#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "hostpar/random.hpp"

using namespace hostpar;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  CHECK(seen.size() == 3000);
}

TEST_CASE("uniform moments") {
  RandomStream rng(1, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::abs(s / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(s2 / n - 1.0 / 3) < 0.005);
}

TEST_CASE("binomial mean and variance") {
  for (auto [n, p] : {std::pair<std::uint64_t, double>{10, 0.3}, {1000, 0.05}, {100000, 0.7}}) {
    RandomStream rng(3, n);
    const int reps = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < reps; ++i) {
      const double x = static_cast<double>(sample_binomial(rng, n, p));
      REQUIRE(x <= n);
      s += x;
      s2 += x * x;
    }
    const double mean = s / reps, var = s2 / reps - mean * mean;
    const double true_var = n * p * (1 - p);
    CHECK(std::abs(mean - n * p) < 5 * std::sqrt(true_var / reps));
    CHECK(var == doctest::Approx(true_var).epsilon(0.05));
  }
  RandomStream rng(0, 0);
  CHECK(sample_binomial(rng, 50, 0.0) == 0);
  CHECK(sample_binomial(rng, 50, 1.0) == 50);
}

TEST_CASE("multinomial preserves the total") {
  RandomStream rng(9, 9);
  const double probs[] = {0.2, 0.0, 0.5, 0.3};
  std::uint64_t counts[4];
  double third = 0;
  for (int i = 0; i < 1000; ++i) {
    sample_multinomial(rng, 12345, probs, counts);
    CHECK(counts[0] + counts[1] + counts[2] + counts[3] == 12345);
    CHECK(counts[1] == 0);
    third += counts[2];
  }
  CHECK(third / 1000 == doctest::Approx(12345 * 0.5).epsilon(0.01));
}

TEST_CASE("discrete sampler frequencies") {
  const double probs[] = {0.1, 0.0, 0.6, 0.3, 0.0};
  const DiscreteSampler s(probs);
  RandomStream rng(5, 1);
  std::vector<int> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[s(rng)];
  CHECK(hits[1] == 0);
  CHECK(hits[4] == 0);
  for (int k : {0, 2, 3}) {
    const double p = probs[k];
    CHECK(std::abs(hits[k] - n * p) < 5 * std::sqrt(n * p * (1 - p)));
  }
}
