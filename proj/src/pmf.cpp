#include "hostpar/pmf.hpp"

#include <algorithm>
#include <cmath>

namespace hostpar {

PmfVector PmfVector::point_mass(std::size_t k, std::size_t k_max) {
  PmfVector out(k_max);
  if (k <= k_max) {
    out.p[k] = 1.0;
  } else {
    out.overflow = 1.0;
  }
  return out;
}

double PmfVector::total() const {
  double s = overflow;
  for (double q : p) s += q;
  return s;
}

double PmfVector::mean_lower() const {
  double m = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) m += static_cast<double>(k) * p[k];
  return m;
}

double PmfVector::residual() const { return std::abs(total() - 1.0); }

double total_variation(const PmfVector& a, const PmfVector& b) {
  const std::size_t n = std::max(a.p.size(), b.p.size());
  double tv = std::abs(a.overflow - b.overflow);
  for (std::size_t k = 0; k < n; ++k) tv += std::abs(a.at(k) - b.at(k));
  return 0.5 * tv;
}

std::vector<double> convolve_truncated(std::span<const double> a, std::span<const double> b, std::size_t k_max) {
  std::vector<double> out(k_max + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && i <= k_max; ++i) {
    if (a[i] == 0.0) continue;
    const std::size_t jmax = std::min(b.size(), k_max - i + 1);
    for (std::size_t j = 0; j < jmax; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

ConvolutionPowers::ConvolutionPowers(std::vector<double> pmf, std::size_t k_max)
    : base_(std::move(pmf)), k_max_(k_max) {
  std::vector<double> zero(k_max_ + 1, 0.0);
  zero[0] = 1.0;
  powers_.push_back(std::move(zero));
}

std::span<const double> ConvolutionPowers::power(std::size_t z) {
  while (powers_.size() <= z) {
    // lambda^{*(z+1)} = lambda^{*z} * lambda; the base has small support so
    // this is O(k_max * support) per step.
    auto next = convolve_truncated(base_, powers_.back(), k_max_);
    powers_.push_back(std::move(next));
  }
  return powers_[z];
}

}  // namespace hostpar
