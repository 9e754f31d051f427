#include "hostpar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hostpar {

// ---------------------------------------------------------------------------
// BPRE recursion

std::vector<PmfVector> exact_bpre_distributions(const Environment& env, std::size_t n, std::size_t k_max,
                                                std::size_t start_z) {
  if (k_max < 1) throw std::invalid_argument("exact_bpre_distribution: k_max must be >= 1");
  std::vector<ConvolutionPowers> powers;
  powers.reserve(env.components.size());
  for (const auto& c : env.components) powers.emplace_back(c.pmf, k_max);

  std::vector<PmfVector> out;
  out.push_back(PmfVector::point_mass(start_z, k_max));
  for (std::size_t gen = 0; gen < n; ++gen) {
    const PmfVector& cur = out.back();
    PmfVector next(k_max);
    next.overflow = cur.overflow;
    for (std::size_t e = 0; e < env.components.size(); ++e) {
      const double w = env.components[e].weight;
      for (std::size_t z = 0; z <= k_max; ++z) {
        const double pz = cur.p[z];
        if (pz == 0.0) continue;
        const auto pw = powers[e].power(z);
        double kept = 0.0;
        for (std::size_t k = 0; k <= k_max; ++k) {
          next.p[k] += w * pz * pw[k];
          kept += pw[k];
        }
        next.overflow += w * pz * std::max(0.0, 1.0 - kept);
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

PmfVector exact_bpre_distribution(const Environment& env, std::size_t n, std::size_t k_max) {
  return exact_bpre_distributions(env, n, k_max).back();
}

// ---------------------------------------------------------------------------
// Cell-line recursion on (type, z)

PmfVector CellLinePmf::conditional(CellType t) const {
  const PmfVector& src = t == CellType::A ? a : b;
  const double mass = src.total();
  PmfVector out(src.k_max());
  if (mass == 0.0) return out;
  for (std::size_t k = 0; k < src.p.size(); ++k) out.p[k] = src.p[k] / mass;
  out.overflow = src.overflow / mass;
  return out;
}

double CellLinePmf::residual() const { return std::abs(a.total() + b.total() - 1.0); }

std::vector<CellLinePmf> exact_cell_line_distributions(const ModelParams& params, std::size_t n, std::size_t k_max,
                                                       CellLineStart start) {
  if (k_max < 1) throw std::invalid_argument("exact_cell_line_distribution: k_max must be >= 1");

  struct Branch {
    double weight;
    CellType to;
    ConvolutionPowers powers;
  };
  std::vector<Branch> from_a;
  for (DaughterPair s : {DaughterPair::AA, DaughterPair::AB, DaughterPair::BB}) {
    const double ps = params.pair_prob(s);
    if (ps == 0.0) continue;
    for (int child = 0; child < 2; ++child) {
      from_a.push_back({ps / 2.0, daughter_type(s, child), ConvolutionPowers(params.law_A(s).marginal(child), k_max)});
    }
  }
  std::vector<Branch> from_b;
  for (int child = 0; child < 2; ++child) {
    from_b.push_back({0.5, CellType::B, ConvolutionPowers(params.law_B.marginal(child), k_max)});
  }

  CellLinePmf init{PmfVector(k_max), PmfVector(k_max)};
  PmfVector& start_pmf = start.type == CellType::A ? init.a : init.b;
  start_pmf = PmfVector::point_mass(start.z, k_max);

  std::vector<CellLinePmf> out{init};
  for (std::size_t gen = 0; gen < n; ++gen) {
    const CellLinePmf& cur = out.back();
    CellLinePmf next{PmfVector(k_max), PmfVector(k_max)};
    auto target = [&](CellType t) -> PmfVector& { return t == CellType::A ? next.a : next.b; };

    // Mass above k_max keeps its type only if it can; from A it may still
    // become B, so it is attributed to the overflow of whichever type it can
    // reach with the type-transition weights.
    const double nu_half = (2.0 * params.p_AA + params.p_AB) / 2.0;
    next.a.overflow += cur.a.overflow * nu_half;
    next.b.overflow += cur.a.overflow * (1.0 - nu_half) + cur.b.overflow;

    auto push = [&](const PmfVector& src, std::vector<Branch>& branches) {
      for (auto& br : branches) {
        PmfVector& dst = target(br.to);
        for (std::size_t z = 0; z <= k_max; ++z) {
          const double pz = src.p[z];
          if (pz == 0.0) continue;
          const auto pw = br.powers.power(z);
          double kept = 0.0;
          for (std::size_t k = 0; k <= k_max; ++k) {
            dst.p[k] += br.weight * pz * pw[k];
            kept += pw[k];
          }
          dst.overflow += br.weight * pz * std::max(0.0, 1.0 - kept);
        }
      }
    };
    push(cur.a, from_a);
    push(cur.b, from_b);
    out.push_back(std::move(next));
  }
  return out;
}

CellLinePmf exact_cell_line_distribution(const ModelParams& params, std::size_t n, std::size_t k_max) {
  return exact_cell_line_distributions(params, n, k_max).back();
}

// ---------------------------------------------------------------------------
// Brute-force enumeration

namespace {

struct DaughterOutcome {
  CellType t0, t1;
  std::uint64_t z0, z1;
  double p;
};

using Joint2D = std::map<std::pair<std::uint64_t, std::uint64_t>, double>;

Joint2D fold_joint(const JointOffspringLaw& law, std::uint64_t z) {
  Joint2D cur{{{0, 0}, 1.0}};
  for (std::uint64_t i = 0; i < z; ++i) {
    Joint2D next;
    for (const auto& [xy, p] : cur) {
      for (const auto& s : law.support()) {
        if (s.p == 0.0) continue;
        next[{xy.first + s.x0, xy.second + s.x1}] += p * s.p;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

class OutcomeCache {
 public:
  explicit OutcomeCache(const ModelParams& params) : params_(params) {}

  const std::vector<DaughterOutcome>& get(CellType t, std::uint64_t z) {
    const auto key = std::make_pair(t, z);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<DaughterOutcome> out;
    if (t == CellType::A) {
      for (DaughterPair s : {DaughterPair::AA, DaughterPair::AB, DaughterPair::BB}) {
        const double ps = params_.pair_prob(s);
        if (ps == 0.0) continue;
        for (const auto& [xy, p] : fold_joint(params_.law_A(s), z)) {
          out.push_back({daughter_type(s, 0), daughter_type(s, 1), xy.first, xy.second, ps * p});
        }
      }
    } else {
      for (const auto& [xy, p] : fold_joint(params_.law_B, z)) {
        out.push_back({CellType::B, CellType::B, xy.first, xy.second, p});
      }
    }
    return cache_.emplace(key, std::move(out)).first->second;
  }

 private:
  const ModelParams& params_;
  std::map<std::pair<CellType, std::uint64_t>, std::vector<DaughterOutcome>> cache_;
};

void add_cell(PopulationState& s, CellType t, std::uint64_t z) {
  if (z == 0) {
    (t == CellType::A ? s.clean_A : s.clean_B) += 1;
    return;
  }
  const auto cell = std::make_pair(t, z);
  s.contaminated.insert(std::upper_bound(s.contaminated.begin(), s.contaminated.end(), cell), cell);
}

}  // namespace

TreeOutcomeTable brute_force_tree(const ModelParams& params, std::size_t n, BruteForceOptions options) {
  if (n > options.max_generations) {
    throw std::invalid_argument("brute_force_tree: n exceeds the configured maximum of " +
                                std::to_string(options.max_generations));
  }
  TreeOutcomeTable table;
  PopulationState root;
  add_cell(root, options.start.type, options.start.z);
  table.generations.push_back({TreeOutcome{1.0, root}});

  OutcomeCache cache(params);
  std::vector<DaughterOutcome> clean_a_outcomes;
  for (DaughterPair s : {DaughterPair::AA, DaughterPair::AB, DaughterPair::BB}) {
    const double ps = params.pair_prob(s);
    if (ps > 0.0) clean_a_outcomes.push_back({daughter_type(s, 0), daughter_type(s, 1), 0, 0, ps});
  }

  for (std::size_t gen = 0; gen < n; ++gen) {
    std::map<PopulationState, double> merged;
    for (const auto& outcome : table.generations.back()) {
      const PopulationState& mothers = outcome.state;
      PopulationState base;
      base.clean_B = 2 * mothers.clean_B;
      std::map<PopulationState, double> partial{{base, outcome.probability}};

      auto expand = [&](const std::vector<DaughterOutcome>& outs) {
        table.weighted_outcomes += partial.size() * outs.size();
        if (table.weighted_outcomes > options.budget) throw BudgetExceeded(table.weighted_outcomes);
        std::map<PopulationState, double> next;
        for (const auto& [state, p] : partial) {
          for (const auto& o : outs) {
            PopulationState s = state;
            add_cell(s, o.t0, o.z0);
            add_cell(s, o.t1, o.z1);
            next[std::move(s)] += p * o.p;
          }
        }
        partial = std::move(next);
      };

      for (const auto& [t, z] : mothers.contaminated) expand(cache.get(t, z));
      for (std::uint64_t i = 0; i < mothers.clean_A; ++i) expand(clean_a_outcomes);
      for (auto& [state, p] : partial) merged[state] += p;
    }
    std::vector<TreeOutcome> level;
    level.reserve(merged.size());
    for (auto& [state, p] : merged) level.push_back({p, state});
    table.generations.push_back(std::move(level));
  }
  return table;
}

double TreeOutcomeTable::total_probability(std::size_t gen) const {
  double s = 0.0;
  for (const auto& o : generations.at(gen)) s += o.probability;
  return s;
}

double TreeOutcomeTable::expected_count(std::size_t gen, CellType t, std::uint64_t k) const {
  double e = 0.0;
  for (const auto& o : generations.at(gen)) {
    std::uint64_t count = 0;
    if (k == 0) {
      count = t == CellType::A ? o.state.clean_A : o.state.clean_B;
    } else {
      count = static_cast<std::uint64_t>(
          std::count(o.state.contaminated.begin(), o.state.contaminated.end(), std::make_pair(t, k)));
    }
    e += o.probability * static_cast<double>(count);
  }
  return e;
}

double TreeOutcomeTable::expected_contaminated(std::size_t gen, CellType t) const {
  double e = 0.0;
  for (const auto& o : generations.at(gen)) {
    for (const auto& c : o.state.contaminated) e += c.first == t ? o.probability : 0.0;
  }
  return e;
}

double TreeOutcomeTable::expected_parasites(std::size_t gen, CellType t) const {
  double e = 0.0;
  for (const auto& o : generations.at(gen)) {
    for (const auto& c : o.state.contaminated) {
      if (c.first == t) e += o.probability * static_cast<double>(c.second);
    }
  }
  return e;
}

double TreeOutcomeTable::expected_cells(std::size_t gen, CellType t) const {
  return expected_contaminated(gen, t) + expected_count(gen, t, 0);
}

CellLinePmf TreeOutcomeTable::cell_line_marginal(std::size_t gen, std::size_t k_max) const {
  CellLinePmf out{PmfVector(k_max), PmfVector(k_max)};
  const double scale = std::ldexp(1.0, -static_cast<int>(gen));
  for (const auto& o : generations.at(gen)) {
    const double w = o.probability * scale;
    out.a.p[0] += w * static_cast<double>(o.state.clean_A);
    out.b.p[0] += w * static_cast<double>(o.state.clean_B);
    for (const auto& [t, z] : o.state.contaminated) {
      PmfVector& dst = t == CellType::A ? out.a : out.b;
      if (z <= k_max) {
        dst.p[z] += w;
      } else {
        dst.overflow += w;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double generating_function(const PmfVector& pmf, double s) {
  double acc = 0.0;
  for (std::size_t k = pmf.p.size(); k-- > 0;) acc = acc * s + pmf.p[k];
  return acc;
}

GwExtinction gw_extinction_prob(const PmfVector& offspring, double tol) {
  GwExtinction out;
  if (offspring.overflow > 0.0) throw std::invalid_argument("gw_extinction_prob: offspring law must be fully resolved");
  if (offspring.p.size() > 1 && offspring.p[1] == 1.0) {
    out.q = 0.0;
    out.degenerate = true;
    return out;
  }
  if (offspring.mean_lower() <= 1.0) {
    out.q = 1.0;
    return out;
  }
  double q = 0.0;
  for (std::size_t it = 1; it <= 100'000'000; ++it) {
    const double next = generating_function(offspring, q);
    out.iterations = it;
    const double change = std::abs(next - q);
    q = next;
    if (change < tol) break;
  }
  out.q = q;
  return out;
}

YaglomProxy yaglom_proxy_B(const ModelParams& params, std::size_t n, std::size_t k_max) {
  const auto dists = exact_bpre_distributions(b_line_environment(params), n, k_max);
  YaglomProxy out;
  for (std::size_t m = 0; m < dists.size(); ++m) {
    const PmfVector& d = dists[m];
    const double alive = d.total() - d.p[0];
    PmfVector cond(k_max);
    if (alive > 0.0) {
      for (std::size_t k = 1; k <= k_max; ++k) cond.p[k] = d.p[k] / alive;
      cond.overflow = d.overflow / alive;
    }
    out.survival.push_back(alive);
    out.tv_successive.push_back(m == 0 ? 0.0 : total_variation(cond, out.conditional.back()));
    out.conditional.push_back(std::move(cond));
  }
  return out;
}

}  // namespace hostpar
