#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hostpar/model.hpp"
#include "hostpar/sim.hpp"

namespace hostpar {

enum class Condition { none, survival_A_at_n, survival_at_n };

const char* to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct McConfig {
  std::size_t replicates = 1000;
  std::size_t n_gens = 10;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  Condition condition = Condition::none;
  std::size_t K_top = 10;
  SimCaps caps{};
  SimScope scope = SimScope::full;
  CellType start_type = CellType::A;
  std::uint64_t start_z = 1;
  // Replicates are reduced in fixed blocks of this size, then blocks in
  // index order, so the result does not depend on the worker count.
  std::size_t block_size = 256;
};

/// Minimum replicate count for which confidence intervals are emitted.
inline constexpr std::size_t kMinReplicatesForCi = 1000;

struct Estimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  bool defined = false;

  /// |value - target| in units of se (inf when se = 0 and value != target).
  double z_score(double target) const;
  bool within_sigma(double target, double k = 3.0) const;
};

/// Running first and second moments.
struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    n += 1.0;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN(); }
  double variance() const;  // unbiased
  Estimate estimate() const;
};

/// Ratio-of-sums estimator sum(N) / sum(D) with a delta-method standard error.
struct RatioMoments {
  double n = 0.0;
  double sum_num = 0.0;
  double sum_den = 0.0;
  double sum_num_sq = 0.0;
  double sum_den_sq = 0.0;
  double sum_cross = 0.0;

  void add(double num, double den);
  void merge(const RatioMoments& o);
  Estimate estimate() const;
};

struct GenerationStats {
  Moments Z_A, Z_B, G_star_A, G_star_B, clean_A;
  Moments W, LA, L, WB, GA;  // GA = nu^-n #G_n(A)
  // F[t][k-1]: ratio #{v in G*_n(t): Z_v = k} / #G*_n(t); t = 0 A, 1 B, 2 all
  std::vector<RatioMoments> F[3];
  Moments proportion_A;  // per-replicate #G*_n(A) / #G*_n, where defined
  double surviving_A = 0.0;
  double surviving_all = 0.0;
  double replicates = 0.0;

  void resize(std::size_t k_top);
  void merge(const GenerationStats& o);
};

struct McSummary {
  McConfig config;
  DerivedQuantities derived;
  std::vector<GenerationStats> generations;
  std::size_t replicates_run = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t saturated = 0;  // accepted replicates excluded from mean tracks
  std::size_t truncated = 0;  // replicates that hit a cap; excluded entirely

  double rejection_rate() const;
  bool b_tracked() const { return config.scope == SimScope::full; }
};

class AllRejected : public std::runtime_error {
 public:
  AllRejected(double survival_frequency, std::size_t replicates);
  double survival_frequency() const { return survival_frequency_; }

 private:
  double survival_frequency_;
};

class NoContaminatedCells : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

McSummary run_mc(const ValidatedModel& model, const McConfig& cfg);

/// Ratio estimator of F_k(n, t); t = std::nullopt means all contaminated cells.
Estimate estimate_Fk(const McSummary& summary, std::size_t n, std::size_t k, std::optional<CellType> t);

/// Mean over replicates of #G*_n(A) / #G*_n.
Estimate proportion_A(const McSummary& summary, std::size_t n);

enum class Track { W, LA, L, WB, GA, Z_A, Z_B, G_star_A, G_star_B };
Estimate track_mean(const McSummary& summary, std::size_t n, Track track);
const char* to_string(Track t);

Estimate survival_frequency(const McSummary& summary, std::size_t n, bool all_parasites);

struct YaglomRow {
  std::size_t k = 0;
  Estimate mc;
  double proxy = 0.0;
  double diff = 0.0;
};

struct YaglomComparison {
  std::vector<YaglomRow> rows;
  double max_diff = 0.0;
  bool thm32c_applies = false;
  double rejection_rate = 0.0;
};

/// Pairs F_k(n, B) (conditioned on A-survival at n) with the exact
/// B-line conditional pmf at the same n.
YaglomComparison yaglom_compare(const ValidatedModel& model, McConfig cfg, std::size_t n, std::size_t k_top,
                                std::size_t oracle_k_max = 400);

struct SurvivalPoint {
  std::size_t n = 0;
  Estimate A;
  Estimate all;  // undefined in a_only scope
};

/// Frequencies of {Z_n(A) > 0} and {Z_n > 0}; unconditioned.
std::vector<SurvivalPoint> survival_curves(const ValidatedModel& model, McConfig cfg);

// ---------------------------------------------------------------------------
// Replicated reduced processes

struct PathStats {
  std::vector<Moments> z;                      // per generation, unsaturated only
  std::vector<std::vector<double>> frequency;  // frequency[n][k] for k <= K
  std::vector<double> alive;                   // #replicates with Z_n > 0
  std::size_t replicates = 0;
  std::size_t saturated = 0;

  Estimate mean(std::size_t n) const { return z.at(n).estimate(); }
  Estimate pmf(std::size_t n, std::size_t k) const;
  Estimate survival(std::size_t n) const;
};

enum class ReducedProcess { bpre_A, bpre_B, gw_B };

PathStats run_path_mc(const ValidatedModel& model, ReducedProcess process, std::size_t n, std::size_t replicates,
                      std::uint64_t seed, std::size_t workers = 1, std::uint64_t start_z = 1, std::size_t k_top = 10,
                      const SimCaps& caps = {});

struct CellLineStats {
  std::vector<double> type_A;                       // count with T_[n] = A
  std::vector<std::vector<double>> z_given_A;       // counts with T = A and Z = k
  std::vector<Moments> z;                           // Z_[n], unconditioned
  std::size_t replicates = 0;

  Estimate prob_type_A(std::size_t n) const;
  Estimate conditional_pmf_A(std::size_t n, std::size_t k) const;
};

CellLineStats run_cell_line_mc(const ValidatedModel& model, std::size_t n, std::size_t replicates, std::uint64_t seed,
                               std::size_t workers = 1, CellLineStep start = {CellType::A, 1}, std::size_t k_top = 10);

/// Binomial-proportion estimate successes / trials.
Estimate proportion_estimate(double successes, double trials);

}  // namespace hostpar
