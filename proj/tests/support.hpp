#pragma once

#include <random>
#include <vector>

#include "hostpar/model.hpp"

namespace testing {

// Random joint law on {0..max_v}^2 with a point having a coordinate >= 2.
inline hostpar::JointOffspringLaw random_law(std::mt19937_64& gen, std::uint64_t max_v, const char* name) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<hostpar::SupportPoint> pts;
  double total = 0.0;
  for (std::uint64_t a = 0; a <= max_v; ++a) {
    for (std::uint64_t b = 0; b <= max_v; ++b) {
      const double w = u(gen);
      pts.push_back({a, b, w});
      total += w;
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    pts[i].p /= total;
    acc += pts[i].p;
  }
  pts.back().p = 1.0 - acc;
  return hostpar::JointOffspringLaw::from_support(std::move(pts), name);
}

inline hostpar::ModelParams random_model(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double a = u(gen), b = u(gen), c = u(gen);
  const double s = a + b + c;
  hostpar::ModelParams p;
  p.p_AA = a / s;
  p.p_AB = b / s;
  p.p_BB = 1.0 - p.p_AA - p.p_AB;
  p.law_A_AA = random_law(gen, 2, "law_A_AA");
  p.law_A_AB = random_law(gen, 2, "law_A_AB");
  p.law_A_BB = random_law(gen, 1, "law_A_BB");
  p.law_B = random_law(gen, 2, "law_B");
  return p;
}

}  // namespace testing
