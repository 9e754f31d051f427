#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hostpar {

/// Probability mass function on {0, ..., k_max} plus the mass of all values
/// above k_max. Buckets are exact lower bounds; the true probability of each
/// bucket lies in [p[k], p[k] + overflow].
struct PmfVector {
  std::vector<double> p;
  double overflow = 0.0;

  PmfVector() = default;
  explicit PmfVector(std::size_t k_max) : p(k_max + 1, 0.0) {}

  static PmfVector point_mass(std::size_t k, std::size_t k_max);

  std::size_t k_max() const { return p.empty() ? 0 : p.size() - 1; }
  double at(std::size_t k) const { return k < p.size() ? p[k] : 0.0; }
  double total() const;
  /// Mean over the resolved buckets only (a lower bound on the true mean).
  double mean_lower() const;
  double bucket_upper(std::size_t k) const { return at(k) + overflow; }
  double error_bound() const { return overflow; }
  /// Normalisation residual |sum p + overflow - 1|.
  double residual() const;
};

/// Total variation distance, treating the overflow mass as one extra bucket.
double total_variation(const PmfVector& a, const PmfVector& b);

/// Powers lambda^{*z} of one pmf, truncated at k_max (exact on every bucket
/// <= k_max since all values are nonnegative). Powers are built on demand and
/// cached.
class ConvolutionPowers {
 public:
  ConvolutionPowers(std::vector<double> pmf, std::size_t k_max);

  /// lambda^{*z} on {0..k_max}; the mass not shown lies above k_max.
  std::span<const double> power(std::size_t z);
  std::size_t k_max() const { return k_max_; }

 private:
  std::vector<double> base_;
  std::size_t k_max_;
  std::vector<std::vector<double>> powers_;  // powers_[z]
};

/// Truncated convolution of two pmfs onto {0..k_max}.
std::vector<double> convolve_truncated(std::span<const double> a, std::span<const double> b, std::size_t k_max);

}  // namespace hostpar
