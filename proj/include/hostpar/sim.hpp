#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hostpar/model.hpp"
#include "hostpar/random.hpp"

namespace hostpar {

using u128 = unsigned __int128;

struct SimCaps {
  std::size_t max_generations = 40;
  std::size_t max_roster = 10'000'000;
  std::uint64_t max_parasites_per_cell = std::numeric_limits<std::int64_t>::max();
  // Parasite sums over more than this many parasites are drawn through a
  // multinomial over the support points instead of one draw per parasite.
  std::uint64_t explicit_sum_limit = 64;
};

enum class SimScope {
  full,    // every cell, clean cells at count level
  a_only,  // A-cells only; B-daughters are dropped on creation
};

enum class HaltReason { none, roster_cap, clean_overflow };

const char* to_string(HaltReason r);

struct Cell {
  CellType type = CellType::A;
  std::uint64_t z = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Population at generation n: contaminated cells individually, clean cells
/// as counts.
struct GenerationState {
  std::size_t n = 0;
  std::vector<Cell> contaminated;
  std::uint64_t clean_A = 0;
  u128 clean_B = 0;
  // cached totals, refreshed by recount()
  std::uint64_t G_star_A = 0;
  std::uint64_t G_star_B = 0;
  u128 Z_A = 0;
  u128 Z_B = 0;

  static GenerationState initial(CellType type, std::uint64_t z);
  void recount();
  std::uint64_t cells_A() const { return G_star_A + clean_A; }
};

struct StepStatus {
  bool saturated = false;
  HaltReason halt = HaltReason::none;
};

/// Per-generation sampling tables compiled from a validated model; immutable
/// and shareable across threads.
class SimEngine {
 public:
  explicit SimEngine(const ValidatedModel& model, SimCaps caps = {});

  const ModelParams& params() const { return params_; }
  const SimCaps& caps() const { return caps_; }

  /// One generation of the whole population. Returns the halt reason if a cap
  /// is hit, in which case `next` is incomplete and must not be used.
  StepStatus step(const GenerationState& current, GenerationState& next, RandomStream& rng,
                  SimScope scope = SimScope::full) const;

  DaughterPair draw_pair(RandomStream& rng) const { return static_cast<DaughterPair>(pair_sampler_(rng)); }

  /// Sum over z iid per-parasite offspring vectors of the law used by a mother
  /// of type t whose daughters are s. Saturates at the per-cell cap.
  std::pair<std::uint64_t, std::uint64_t> draw_joint_sum(CellType t, DaughterPair s, std::uint64_t z,
                                                         RandomStream& rng, bool& saturated) const;

  /// Sum of z iid draws from coordinate `child` of that law.
  std::uint64_t draw_marginal_sum(CellType t, DaughterPair s, int child, std::uint64_t z, RandomStream& rng,
                                  bool& saturated) const;

 private:
  struct LawTable {
    std::vector<std::uint64_t> x0, x1;
    std::vector<double> probs;
    DiscreteSampler sampler;
    // marginal value tables for cell-line sampling
    std::vector<double> marginal_probs[2];
    DiscreteSampler marginal_sampler[2];
  };

  static LawTable compile(const JointOffspringLaw& law);
  const LawTable& table(CellType t, DaughterPair s) const;

  ModelParams params_;
  SimCaps caps_;
  DiscreteSampler pair_sampler_;
  double pair_probs_[3];
  LawTable laws_[4];  // A_AA, A_AB, A_BB, B
};

struct GenerationSummary {
  std::size_t n = 0;
  std::uint64_t G_star_A = 0;
  std::uint64_t G_star_B = 0;
  std::uint64_t clean_A = 0;
  u128 clean_B = 0;
  u128 Z_A = 0;
  u128 Z_B = 0;
  // count_A[k-1] = #{v in G*_n(A) : Z_v = k} for k = 1..K; same for B.
  std::vector<std::uint64_t> count_A;
  std::vector<std::uint64_t> count_B;
};

struct Trajectory {
  std::vector<GenerationSummary> generations;
  bool truncated = false;
  bool saturated = false;
  HaltReason halt = HaltReason::none;
  SimScope scope = SimScope::full;
};

struct TreeOptions {
  CellType start_type = CellType::A;
  std::uint64_t start_z = 1;
  SimScope scope = SimScope::full;
  std::size_t k_top = 10;
};

GenerationSummary summarize(const GenerationState& state, std::size_t k_top);

Trajectory simulate_tree(const SimEngine& engine, std::size_t n_gens, RandomStream& rng, const TreeOptions& options = {});
Trajectory simulate_tree(const ValidatedModel& model, std::size_t n_gens, std::uint64_t seed, const SimCaps& caps = {},
                         const TreeOptions& options = {});

struct CellLineStep {
  CellType type = CellType::A;
  std::uint64_t z = 0;
};

struct CellLineTrajectory {
  std::vector<CellLineStep> steps;  // steps[m] = (T_[m], Z_[m])
  std::vector<std::uint8_t> path;   // path[m-1] = U_m
  bool saturated = false;
};

CellLineTrajectory simulate_cell_line(const SimEngine& engine, std::size_t n, RandomStream& rng,
                                      CellLineStep start = {CellType::A, 1});
CellLineTrajectory simulate_cell_line(const ValidatedModel& model, std::size_t n, std::uint64_t seed,
                                      CellLineStep start = {CellType::A, 1});

struct ZPath {
  std::vector<std::uint64_t> z;
  bool saturated = false;
};

/// Galton-Watson process in iid random environment: each generation draws
/// one component of env and all individuals reproduce with its pmf.
class BpreSampler {
 public:
  BpreSampler(const Environment& env, std::uint64_t cap, std::uint64_t explicit_sum_limit = 64);

  ZPath run(std::size_t n, std::uint64_t start_z, RandomStream& rng) const;

 private:
  std::vector<std::vector<double>> pmfs_;
  std::vector<DiscreteSampler> samplers_;
  DiscreteSampler choose_;
  std::uint64_t cap_;
  std::uint64_t explicit_limit_;
};

ZPath simulate_bpre_A(const ValidatedModel& model, std::size_t n, std::uint64_t seed, const SimCaps& caps = {});
ZPath simulate_bpre_B(const ValidatedModel& model, std::size_t n, std::uint64_t seed, std::uint64_t start_z,
                      const SimCaps& caps = {});
ZPath simulate_gw_B(const ValidatedModel& model, std::size_t n, std::uint64_t seed, std::uint64_t start_z,
                    const SimCaps& caps = {});

Environment gw_B_environment(const ModelParams& params);

/// Decimal rendering of a 128-bit count.
std::string to_decimal(u128 v);
double to_double(u128 v);

}  // namespace hostpar
