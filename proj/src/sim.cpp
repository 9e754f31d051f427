#include "hostpar/sim.hpp"

#include <algorithm>
#include <array>

namespace hostpar {

namespace {

constexpr u128 kU128Max = ~static_cast<u128>(0);

std::uint64_t clamp_to(u128 v, std::uint64_t cap, bool& saturated) {
  if (v > cap) {
    saturated = true;
    return cap;
  }
  return static_cast<std::uint64_t>(v);
}

std::vector<std::uint64_t>& scratch_counts(std::size_t n) {
  thread_local std::vector<std::uint64_t> buf;
  buf.resize(n);
  return buf;
}

// Sum of z iid draws from the pmf (values are the indices).
u128 draw_value_sum(std::span<const double> probs, const DiscreteSampler& sampler, std::uint64_t z,
                    std::uint64_t explicit_limit, RandomStream& rng) {
  u128 total = 0;
  if (z <= explicit_limit) {
    for (std::uint64_t i = 0; i < z; ++i) total += sampler(rng);
    return total;
  }
  auto& counts = scratch_counts(probs.size());
  sample_multinomial(rng, z, probs, counts);
  for (std::size_t v = 1; v < probs.size(); ++v) total += static_cast<u128>(counts[v]) * v;
  return total;
}

}  // namespace

const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::none: return "none";
    case HaltReason::roster_cap: return "roster_cap";
    case HaltReason::clean_overflow: return "clean_overflow";
  }
  return "?";
}

std::string to_decimal(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

double to_double(u128 v) { return static_cast<double>(v); }

GenerationState GenerationState::initial(CellType type, std::uint64_t z) {
  GenerationState s;
  if (z > 0) {
    s.contaminated.push_back({type, z});
  } else if (type == CellType::A) {
    s.clean_A = 1;
  } else {
    s.clean_B = 1;
  }
  s.recount();
  return s;
}

void GenerationState::recount() {
  G_star_A = G_star_B = 0;
  Z_A = Z_B = 0;
  for (const auto& c : contaminated) {
    if (c.type == CellType::A) {
      ++G_star_A;
      Z_A += c.z;
    } else {
      ++G_star_B;
      Z_B += c.z;
    }
  }
}

// ---------------------------------------------------------------------------

SimEngine::LawTable SimEngine::compile(const JointOffspringLaw& law) {
  LawTable t;
  for (const auto& s : law.support()) {
    t.x0.push_back(s.x0);
    t.x1.push_back(s.x1);
    t.probs.push_back(s.p);
  }
  t.sampler = DiscreteSampler(t.probs);
  for (int i = 0; i < 2; ++i) {
    t.marginal_probs[i] = law.marginal(i);
    t.marginal_sampler[i] = DiscreteSampler(t.marginal_probs[i]);
  }
  return t;
}

SimEngine::SimEngine(const ValidatedModel& model, SimCaps caps)
    : params_(model.params()),
      caps_(caps),
      pair_probs_{params_.p_AA, params_.p_AB, params_.p_BB},
      laws_{compile(params_.law_A_AA), compile(params_.law_A_AB), compile(params_.law_A_BB), compile(params_.law_B)} {
  pair_sampler_ = DiscreteSampler(std::span<const double>(pair_probs_, 3));
}

const SimEngine::LawTable& SimEngine::table(CellType t, DaughterPair s) const {
  return t == CellType::B ? laws_[3] : laws_[static_cast<int>(s)];
}

std::pair<std::uint64_t, std::uint64_t> SimEngine::draw_joint_sum(CellType t, DaughterPair s, std::uint64_t z,
                                                                  RandomStream& rng, bool& saturated) const {
  const LawTable& law = table(t, s);
  u128 a = 0, b = 0;
  if (law.probs.size() == 1) {
    a = static_cast<u128>(law.x0[0]) * z;
    b = static_cast<u128>(law.x1[0]) * z;
  } else if (z <= caps_.explicit_sum_limit) {
    for (std::uint64_t i = 0; i < z; ++i) {
      const std::size_t j = law.sampler(rng);
      a += law.x0[j];
      b += law.x1[j];
    }
  } else {
    auto& counts = scratch_counts(law.probs.size());
    sample_multinomial(rng, z, law.probs, counts);
    for (std::size_t j = 0; j < counts.size(); ++j) {
      a += static_cast<u128>(counts[j]) * law.x0[j];
      b += static_cast<u128>(counts[j]) * law.x1[j];
    }
  }
  return {clamp_to(a, caps_.max_parasites_per_cell, saturated), clamp_to(b, caps_.max_parasites_per_cell, saturated)};
}

std::uint64_t SimEngine::draw_marginal_sum(CellType t, DaughterPair s, int child, std::uint64_t z, RandomStream& rng,
                                           bool& saturated) const {
  const LawTable& law = table(t, s);
  const u128 sum = draw_value_sum(law.marginal_probs[child], law.marginal_sampler[child], z,
                                  caps_.explicit_sum_limit, rng);
  return clamp_to(sum, caps_.max_parasites_per_cell, saturated);
}

StepStatus SimEngine::step(const GenerationState& cur, GenerationState& next, RandomStream& rng,
                           SimScope scope) const {
  StepStatus status;
  next.n = cur.n + 1;
  next.contaminated.clear();
  next.clean_A = 0;
  next.clean_B = 0;

  auto place = [&](CellType t, std::uint64_t z) {
    if (t == CellType::B && scope == SimScope::a_only) return;
    if (z > 0) {
      next.contaminated.push_back({t, z});
    } else if (t == CellType::A) {
      ++next.clean_A;
    } else {
      ++next.clean_B;
    }
  };

  for (const Cell& mother : cur.contaminated) {
    const DaughterPair s = mother.type == CellType::A ? draw_pair(rng) : DaughterPair::BB;
    const auto [z0, z1] = draw_joint_sum(mother.type, s, mother.z, rng, status.saturated);
    place(daughter_type(s, 0), z0);
    place(daughter_type(s, 1), z1);
    if (next.contaminated.size() > caps_.max_roster) {
      status.halt = HaltReason::roster_cap;
      return status;
    }
  }

  if (cur.clean_A > 0) {
    std::array<std::uint64_t, 3> split{};
    sample_multinomial(rng, cur.clean_A, std::span<const double>(pair_probs_, 3), split);
    next.clean_A += 2 * split[0] + split[1];
    if (scope == SimScope::full) next.clean_B += split[1] + 2 * split[2];
  }

  if (scope == SimScope::full) {
    const u128 room = kU128Max - next.clean_B;
    if (cur.clean_B > room / 2) {
      status.halt = HaltReason::clean_overflow;
      return status;
    }
    next.clean_B += 2 * cur.clean_B;
  }
  next.recount();
  return status;
}

// ---------------------------------------------------------------------------

GenerationSummary summarize(const GenerationState& state, std::size_t k_top) {
  GenerationSummary s;
  s.n = state.n;
  s.G_star_A = state.G_star_A;
  s.G_star_B = state.G_star_B;
  s.clean_A = state.clean_A;
  s.clean_B = state.clean_B;
  s.Z_A = state.Z_A;
  s.Z_B = state.Z_B;
  s.count_A.assign(k_top, 0);
  s.count_B.assign(k_top, 0);
  for (const auto& c : state.contaminated) {
    if (c.z <= k_top) (c.type == CellType::A ? s.count_A : s.count_B)[c.z - 1] += 1;
  }
  return s;
}

Trajectory simulate_tree(const SimEngine& engine, std::size_t n_gens, RandomStream& rng, const TreeOptions& options) {
  if (n_gens > engine.caps().max_generations) {
    throw std::invalid_argument("simulate_tree: n_gens exceeds max_generations");
  }
  Trajectory traj;
  traj.scope = options.scope;
  GenerationState cur = GenerationState::initial(options.start_type, options.start_z);
  GenerationState next;
  traj.generations.push_back(summarize(cur, options.k_top));
  for (std::size_t g = 0; g < n_gens; ++g) {
    const StepStatus st = engine.step(cur, next, rng, options.scope);
    traj.saturated = traj.saturated || st.saturated;
    if (st.halt != HaltReason::none) {
      traj.truncated = true;
      traj.halt = st.halt;
      break;
    }
    std::swap(cur, next);
    traj.generations.push_back(summarize(cur, options.k_top));
  }
  return traj;
}

Trajectory simulate_tree(const ValidatedModel& model, std::size_t n_gens, std::uint64_t seed, const SimCaps& caps,
                         const TreeOptions& options) {
  SimEngine engine(model, caps);
  RandomStream rng(seed, 0);
  return simulate_tree(engine, n_gens, rng, options);
}

// ---------------------------------------------------------------------------

CellLineTrajectory simulate_cell_line(const SimEngine& engine, std::size_t n, RandomStream& rng, CellLineStep start) {
  CellLineTrajectory out;
  out.steps.reserve(n + 1);
  out.path.reserve(n);
  out.steps.push_back(start);
  CellLineStep cur = start;
  for (std::size_t m = 0; m < n; ++m) {
    const DaughterPair s = cur.type == CellType::A ? engine.draw_pair(rng) : DaughterPair::BB;
    const int u = rng.coin() ? 1 : 0;
    const std::uint64_t z = cur.z == 0 ? 0 : engine.draw_marginal_sum(cur.type, s, u, cur.z, rng, out.saturated);
    cur = {daughter_type(s, u), z};
    out.path.push_back(static_cast<std::uint8_t>(u));
    out.steps.push_back(cur);
  }
  return out;
}

CellLineTrajectory simulate_cell_line(const ValidatedModel& model, std::size_t n, std::uint64_t seed,
                                      CellLineStep start) {
  SimEngine engine(model);
  RandomStream rng(seed, 0);
  return simulate_cell_line(engine, n, rng, start);
}

// ---------------------------------------------------------------------------

BpreSampler::BpreSampler(const Environment& env, std::uint64_t cap, std::uint64_t explicit_sum_limit)
    : cap_(cap), explicit_limit_(explicit_sum_limit) {
  std::vector<double> weights;
  for (const auto& c : env.components) {
    weights.push_back(c.weight);
    pmfs_.push_back(c.pmf);
    samplers_.emplace_back(pmfs_.back());
  }
  choose_ = DiscreteSampler(weights);
}

ZPath BpreSampler::run(std::size_t n, std::uint64_t start_z, RandomStream& rng) const {
  ZPath out;
  out.z.reserve(n + 1);
  out.z.push_back(start_z);
  std::uint64_t z = start_z;
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t e = choose_(rng);
    if (z > 0) z = clamp_to(draw_value_sum(pmfs_[e], samplers_[e], z, explicit_limit_, rng), cap_, out.saturated);
    out.z.push_back(z);
  }
  return out;
}

Environment gw_B_environment(const ModelParams& params) {
  Environment env;
  env.components.push_back({1.0, params.law_B.sum_law(), "X0(B)+X1(B)"});
  return env;
}

ZPath simulate_bpre_A(const ValidatedModel& model, std::size_t n, std::uint64_t seed, const SimCaps& caps) {
  RandomStream rng(seed, 0);
  return BpreSampler(bpre_environment(model), caps.max_parasites_per_cell, caps.explicit_sum_limit).run(n, 1, rng);
}

ZPath simulate_bpre_B(const ValidatedModel& model, std::size_t n, std::uint64_t seed, std::uint64_t start_z,
                      const SimCaps& caps) {
  RandomStream rng(seed, 0);
  return BpreSampler(b_line_environment(model.params()), caps.max_parasites_per_cell, caps.explicit_sum_limit)
      .run(n, start_z, rng);
}

ZPath simulate_gw_B(const ValidatedModel& model, std::size_t n, std::uint64_t seed, std::uint64_t start_z,
                    const SimCaps& caps) {
  RandomStream rng(seed, 0);
  return BpreSampler(gw_B_environment(model.params()), caps.max_parasites_per_cell, caps.explicit_sum_limit)
      .run(n, start_z, rng);
}

}  // namespace hostpar
