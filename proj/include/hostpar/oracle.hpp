#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hostpar/model.hpp"
#include "hostpar/pmf.hpp"

namespace hostpar {

// Exact small-instance computations used as ground truth by the stochastic
// tests. Everything here is a pure function of its inputs.

/// Annealed pmf of a BPRE with environment env after each generation
/// 0..n, started from start_z individuals.
std::vector<PmfVector> exact_bpre_distributions(const Environment& env, std::size_t n, std::size_t k_max,
                                                std::size_t start_z = 1);

PmfVector exact_bpre_distribution(const Environment& env, std::size_t n, std::size_t k_max);

/// Joint pmf of (T_[n], Z_[n]) along a uniformly random cell line.
struct CellLinePmf {
  PmfVector a;  // a.p[k] = P(T = A, Z = k); a.overflow = P(T = A, Z > k_max)
  PmfVector b;

  double prob_type(CellType t) const { return t == CellType::A ? a.total() : b.total(); }
  /// Law of Z given the type, normalised by the type probability.
  PmfVector conditional(CellType t) const;
  double residual() const;
};

struct CellLineStart {
  CellType type = CellType::A;
  std::size_t z = 1;
};

std::vector<CellLinePmf> exact_cell_line_distributions(const ModelParams& params, std::size_t n, std::size_t k_max,
                                                       CellLineStart start = {});

CellLinePmf exact_cell_line_distribution(const ModelParams& params, std::size_t n, std::size_t k_max);

// ---------------------------------------------------------------------------
// Exhaustive enumeration of the whole population process.

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(std::uint64_t attempted)
      : std::runtime_error("brute-force budget exceeded after " + std::to_string(attempted) + " weighted outcomes"),
        attempted_(attempted) {}
  std::uint64_t attempted() const { return attempted_; }

 private:
  std::uint64_t attempted_;
};

struct PopulationState {
  // Contaminated cells, sorted by (type, z).
  std::vector<std::pair<CellType, std::uint64_t>> contaminated;
  std::uint64_t clean_A = 0;
  std::uint64_t clean_B = 0;

  friend auto operator<=>(const PopulationState&, const PopulationState&) = default;
};

struct TreeOutcome {
  double probability = 0.0;
  PopulationState state;
};

/// Exact law of the population at each generation 0..n. Outcomes that lead to
/// the same population (as a multiset of cells) are merged.
struct TreeOutcomeTable {
  std::vector<std::vector<TreeOutcome>> generations;
  std::uint64_t weighted_outcomes = 0;

  std::size_t depth() const { return generations.size() - 1; }
  double total_probability(std::size_t gen) const;
  /// E #{v in G_gen(t) : Z_v = k}; k = 0 counts clean cells.
  double expected_count(std::size_t gen, CellType t, std::uint64_t k) const;
  double expected_contaminated(std::size_t gen, CellType t) const;
  double expected_parasites(std::size_t gen, CellType t) const;
  double expected_cells(std::size_t gen, CellType t) const;
  /// P(T_[gen] = t, Z_[gen] = k) by averaging over the 2^gen cells.
  CellLinePmf cell_line_marginal(std::size_t gen, std::size_t k_max) const;
};

struct BruteForceOptions {
  std::size_t max_generations = 3;
  std::uint64_t budget = 10'000'000;
  CellLineStart start{};
};

TreeOutcomeTable brute_force_tree(const ModelParams& params, std::size_t n, BruteForceOptions options = {});

// ---------------------------------------------------------------------------

struct GwExtinction {
  double q = 1.0;
  bool degenerate = false;  // offspring law is the point mass at 1
  std::size_t iterations = 0;
};

/// Smallest fixed point of the offspring generating function.
GwExtinction gw_extinction_prob(const PmfVector& offspring, double tol = 1e-14);

double generating_function(const PmfVector& pmf, double s);

struct YaglomProxy {
  // conditional[m] = P_{1,B}(Z_[m] = . | Z_[m] > 0) for m = 0..n.
  std::vector<PmfVector> conditional;
  // tv_successive[m] = TV(conditional[m], conditional[m-1]); entry 0 is 0.
  std::vector<double> tv_successive;
  // Unconditional survival probability lower bound per generation.
  std::vector<double> survival;
};

YaglomProxy yaglom_proxy_B(const ModelParams& params, std::size_t n, std::size_t k_max);

}  // namespace hostpar
