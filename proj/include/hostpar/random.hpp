#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace hostpar {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// 64-bit random stream identified by (seed, stream). Two streams with the
/// same seed and different stream ids never share a counter block, so
/// replicate r of a run always sees the same numbers whatever the worker
/// layout.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool coin() { return ((*this)() >> 63) != 0; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;  // number of 32-bit words consumed from buffer_
};

std::uint64_t sample_binomial(RandomStream& rng, std::uint64_t n, double p);

/// Counts for n trials over the categories of probs (which need not be
/// normalised exactly; the last category absorbs the remainder).
void sample_multinomial(RandomStream& rng, std::uint64_t n, std::span<const double> probs,
                        std::span<std::uint64_t> counts);

/// Inverse-cdf sampler over indices 0..size-1.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> probs);

  std::size_t operator()(RandomStream& rng) const;
  std::size_t size() const { return cdf_.size(); }
  std::span<const double> probs() const { return probs_; }

 private:
  std::vector<double> cdf_;
  std::vector<double> probs_;
};

}  // namespace hostpar
