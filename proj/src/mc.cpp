#include "hostpar/mc.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "hostpar/oracle.hpp"

namespace hostpar {

namespace {

// Runs body(replicate, block_accumulator) for every replicate. Blocks are
// fixed ranges of replicate indices, so the per-block results (and their
// in-order merge) are independent of the number of workers.
template <class Acc, class Make, class Body>
std::vector<Acc> run_blocks(std::size_t replicates, std::size_t block_size, std::size_t workers, Make make,
                            Body body) {
  block_size = std::max<std::size_t>(1, block_size);
  const std::size_t n_blocks = (replicates + block_size - 1) / block_size;
  std::vector<Acc> blocks;
  blocks.reserve(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) blocks.push_back(make());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= n_blocks) return;
        const std::size_t hi = std::min(replicates, (b + 1) * block_size);
        for (std::size_t r = b * block_size; r < hi; ++r) body(r, blocks[b]);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n_blocks);
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(1, n_blocks)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return blocks;
}

double inv_pow(double base, std::size_t n) { return std::pow(base, -static_cast<double>(n)); }

Estimate with_ci(Estimate e) {
  if (e.defined && e.n >= kMinReplicatesForCi && std::isfinite(e.se)) {
    e.ci_lo = e.value - 1.96 * e.se;
    e.ci_hi = e.value + 1.96 * e.se;
  }
  return e;
}

}  // namespace

const char* to_string(Condition c) {
  switch (c) {
    case Condition::none: return "none";
    case Condition::survival_A_at_n: return "survival_A_at_n";
    case Condition::survival_at_n: return "survival_at_n";
  }
  return "?";
}

Condition condition_from_string(const std::string& s) {
  if (s == "none") return Condition::none;
  if (s == "survival_A_at_n") return Condition::survival_A_at_n;
  if (s == "survival_at_n") return Condition::survival_at_n;
  throw std::invalid_argument("unknown condition '" + s + "'");
}

const char* to_string(Track t) {
  switch (t) {
    case Track::W: return "W_n";
    case Track::LA: return "LA_n";
    case Track::L: return "L_n";
    case Track::WB: return "WB_n";
    case Track::GA: return "GA_n";
    case Track::Z_A: return "Z_A";
    case Track::Z_B: return "Z_B";
    case Track::G_star_A: return "G_star_A";
    case Track::G_star_B: return "G_star_B";
  }
  return "?";
}

double Estimate::z_score(double target) const {
  const double diff = std::abs(value - target);
  if (diff == 0.0) return 0.0;
  if (!(se > 0.0)) return std::numeric_limits<double>::infinity();
  return diff / se;
}

bool Estimate::within_sigma(double target, double k) const { return defined && z_score(target) <= k; }

double Moments::variance() const {
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = sum / n;
  return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
}

Estimate Moments::estimate() const {
  Estimate e;
  e.n = static_cast<std::size_t>(n);
  if (n < 1) return e;
  e.defined = true;
  e.value = mean();
  e.se = n >= 2 ? std::sqrt(variance() / n) : std::numeric_limits<double>::quiet_NaN();
  return with_ci(e);
}

void RatioMoments::add(double num, double den) {
  n += 1.0;
  sum_num += num;
  sum_den += den;
  sum_num_sq += num * num;
  sum_den_sq += den * den;
  sum_cross += num * den;
}

void RatioMoments::merge(const RatioMoments& o) {
  n += o.n;
  sum_num += o.sum_num;
  sum_den += o.sum_den;
  sum_num_sq += o.sum_num_sq;
  sum_den_sq += o.sum_den_sq;
  sum_cross += o.sum_cross;
}

Estimate RatioMoments::estimate() const {
  Estimate e;
  e.n = static_cast<std::size_t>(n);
  if (sum_den <= 0.0) return e;
  e.defined = true;
  const double r = sum_num / sum_den;
  e.value = r;
  if (n >= 2) {
    const double resid_sq = std::max(0.0, sum_num_sq - 2.0 * r * sum_cross + r * r * sum_den_sq);
    const double mean_den = sum_den / n;
    e.se = std::sqrt(resid_sq / (n - 1.0) / n) / mean_den;
  }
  return with_ci(e);
}

Estimate proportion_estimate(double successes, double trials) {
  Estimate e;
  e.n = static_cast<std::size_t>(trials);
  if (trials <= 0) return e;
  e.defined = true;
  e.value = successes / trials;
  e.se = std::sqrt(e.value * (1.0 - e.value) / trials);
  return with_ci(e);
}

void GenerationStats::resize(std::size_t k_top) {
  for (auto& f : F) f.assign(k_top, RatioMoments{});
}

void GenerationStats::merge(const GenerationStats& o) {
  for (auto [a, b] : {std::pair{&Z_A, &o.Z_A}, {&Z_B, &o.Z_B}, {&G_star_A, &o.G_star_A}, {&G_star_B, &o.G_star_B},
                      {&clean_A, &o.clean_A}, {&W, &o.W}, {&LA, &o.LA}, {&L, &o.L}, {&WB, &o.WB}, {&GA, &o.GA},
                      {&proportion_A, &o.proportion_A}}) {
    a->merge(*b);
  }
  for (int t = 0; t < 3; ++t) {
    for (std::size_t k = 0; k < F[t].size(); ++k) F[t][k].merge(o.F[t][k]);
  }
  surviving_A += o.surviving_A;
  surviving_all += o.surviving_all;
  replicates += o.replicates;
}

double McSummary::rejection_rate() const {
  const std::size_t considered = accepted + rejected;
  return considered == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(considered);
}

AllRejected::AllRejected(double survival_frequency, std::size_t replicates)
    : std::runtime_error("conditioning event never occurred in " + std::to_string(replicates) +
                         " replicates (observed survival frequency " + std::to_string(survival_frequency) + ")"),
      survival_frequency_(survival_frequency) {}

// ---------------------------------------------------------------------------

namespace {

struct McBlock {
  std::vector<GenerationStats> gens;
  std::size_t run = 0, accepted = 0, rejected = 0, saturated = 0, truncated = 0;
};

}  // namespace

McSummary run_mc(const ValidatedModel& model, const McConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("run_mc: replicates must be >= 1");
  if (cfg.K_top < 1) throw std::invalid_argument("run_mc: K_top must be >= 1");

  const SimEngine engine(model, cfg.caps);
  McSummary summary;
  summary.config = cfg;
  summary.derived = derive(model);
  const auto& d = summary.derived;

  TreeOptions opts;
  opts.start_type = cfg.start_type;
  opts.start_z = cfg.start_z;
  opts.scope = cfg.scope;
  opts.k_top = cfg.K_top;

  const std::size_t n_gens = cfg.n_gens;
  std::vector<double> f_gamma(n_gens + 1), f_nu(n_gens + 1), f_two(n_gens + 1), f_muB(n_gens + 1);
  for (std::size_t n = 0; n <= n_gens; ++n) {
    f_gamma[n] = inv_pow(d.gamma, n);
    f_nu[n] = inv_pow(d.nu, n);
    f_two[n] = inv_pow(2.0, n);
    f_muB[n] = inv_pow(d.mu_B, n);
  }

  auto make = [&] {
    McBlock b;
    b.gens.resize(n_gens + 1);
    for (auto& g : b.gens) g.resize(cfg.K_top);
    return b;
  };

  auto body = [&](std::size_t r, McBlock& acc) {
    RandomStream rng(cfg.master_seed, r);
    const Trajectory traj = simulate_tree(engine, n_gens, rng, opts);
    ++acc.run;
    if (traj.truncated) {
      ++acc.truncated;
      return;
    }
    const auto& last = traj.generations.back();
    const bool accept = cfg.condition == Condition::none ||
                        (cfg.condition == Condition::survival_A_at_n && last.Z_A > 0) ||
                        (cfg.condition == Condition::survival_at_n && last.Z_A + last.Z_B > 0);
    if (!accept) {
      ++acc.rejected;
      return;
    }
    ++acc.accepted;
    if (traj.saturated) ++acc.saturated;

    for (std::size_t n = 0; n <= n_gens; ++n) {
      const GenerationSummary& s = traj.generations[n];
      GenerationStats& g = acc.gens[n];
      const double zA = to_double(s.Z_A), zB = to_double(s.Z_B);
      const double gA = static_cast<double>(s.G_star_A), gB = static_cast<double>(s.G_star_B);
      g.replicates += 1.0;
      g.surviving_A += s.Z_A > 0 ? 1.0 : 0.0;
      g.surviving_all += s.Z_A + s.Z_B > 0 ? 1.0 : 0.0;
      for (std::size_t k = 1; k <= cfg.K_top; ++k) {
        const double nA = static_cast<double>(s.count_A[k - 1]);
        const double nB = static_cast<double>(s.count_B[k - 1]);
        g.F[0][k - 1].add(nA, gA);
        g.F[1][k - 1].add(nB, gB);
        g.F[2][k - 1].add(nA + nB, gA + gB);
      }
      if (gA + gB > 0) g.proportion_A.add(gA / (gA + gB));
      if (traj.saturated) continue;
      g.Z_A.add(zA);
      g.Z_B.add(zB);
      g.G_star_A.add(gA);
      g.G_star_B.add(gB);
      g.clean_A.add(static_cast<double>(s.clean_A));
      g.W.add(f_gamma[n] * zA);
      g.LA.add(f_nu[n] * gA);
      g.L.add(f_two[n] * (gA + gB));
      g.WB.add(f_muB[n] * zB);
      g.GA.add(f_nu[n] * (gA + static_cast<double>(s.clean_A)));
    }
  };

  auto blocks = run_blocks<McBlock>(cfg.replicates, cfg.block_size, cfg.workers, make, body);

  summary.generations.resize(n_gens + 1);
  for (auto& g : summary.generations) g.resize(cfg.K_top);
  for (const auto& b : blocks) {
    for (std::size_t n = 0; n <= n_gens; ++n) summary.generations[n].merge(b.gens[n]);
    summary.replicates_run += b.run;
    summary.accepted += b.accepted;
    summary.rejected += b.rejected;
    summary.saturated += b.saturated;
    summary.truncated += b.truncated;
  }
  if (summary.accepted == 0) {
    const double surv = summary.replicates_run > 0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    throw AllRejected(surv, summary.replicates_run);
  }
  return summary;
}

Estimate estimate_Fk(const McSummary& summary, std::size_t n, std::size_t k, std::optional<CellType> t) {
  if (k < 1 || k > summary.config.K_top) throw std::out_of_range("estimate_Fk: k outside 1..K_top");
  if (t == CellType::B && !summary.b_tracked()) throw std::invalid_argument("estimate_Fk: B-cells were not tracked");
  const int idx = !t ? 2 : (*t == CellType::A ? 0 : 1);
  const Estimate e = summary.generations.at(n).F[idx][k - 1].estimate();
  if (!e.defined) throw NoContaminatedCells("no contaminated cells of the requested type at generation " + std::to_string(n));
  return e;
}

Estimate proportion_A(const McSummary& summary, std::size_t n) {
  if (!summary.b_tracked()) throw std::invalid_argument("proportion_A: B-cells were not tracked");
  const Estimate e = summary.generations.at(n).proportion_A.estimate();
  if (!e.defined) throw NoContaminatedCells("no contaminated cells at generation " + std::to_string(n));
  return e;
}

Estimate track_mean(const McSummary& summary, std::size_t n, Track track) {
  const GenerationStats& g = summary.generations.at(n);
  switch (track) {
    case Track::W: return g.W.estimate();
    case Track::LA: return g.LA.estimate();
    case Track::L: return g.L.estimate();
    case Track::WB: return g.WB.estimate();
    case Track::GA: return g.GA.estimate();
    case Track::Z_A: return g.Z_A.estimate();
    case Track::Z_B: return g.Z_B.estimate();
    case Track::G_star_A: return g.G_star_A.estimate();
    case Track::G_star_B: return g.G_star_B.estimate();
  }
  return {};
}

Estimate survival_frequency(const McSummary& summary, std::size_t n, bool all_parasites) {
  const GenerationStats& g = summary.generations.at(n);
  if (all_parasites && !summary.b_tracked()) return {};
  return proportion_estimate(all_parasites ? g.surviving_all : g.surviving_A, g.replicates);
}

YaglomComparison yaglom_compare(const ValidatedModel& model, McConfig cfg, std::size_t n, std::size_t k_top,
                                std::size_t oracle_k_max) {
  cfg.n_gens = n;
  cfg.K_top = k_top;
  cfg.condition = Condition::survival_A_at_n;
  cfg.scope = SimScope::full;
  const McSummary summary = run_mc(model, cfg);
  const YaglomProxy proxy = yaglom_proxy_B(model.params(), n, std::max(oracle_k_max, k_top));

  YaglomComparison out;
  out.thm32c_applies = classify(model).thm32c_applies;
  out.rejection_rate = summary.rejection_rate();
  for (std::size_t k = 1; k <= k_top; ++k) {
    YaglomRow row;
    row.k = k;
    row.mc = estimate_Fk(summary, n, k, CellType::B);
    row.proxy = proxy.conditional[n].at(k);
    row.diff = std::abs(row.mc.value - row.proxy);
    out.max_diff = std::max(out.max_diff, row.diff);
    out.rows.push_back(row);
  }
  return out;
}

std::vector<SurvivalPoint> survival_curves(const ValidatedModel& model, McConfig cfg) {
  cfg.condition = Condition::none;
  const McSummary summary = run_mc(model, cfg);
  std::vector<SurvivalPoint> out;
  for (std::size_t n = 0; n <= cfg.n_gens; ++n) {
    out.push_back({n, survival_frequency(summary, n, false), survival_frequency(summary, n, true)});
  }
  return out;
}

// ---------------------------------------------------------------------------

Estimate PathStats::pmf(std::size_t n, std::size_t k) const {
  return proportion_estimate(frequency.at(n).at(k), static_cast<double>(replicates));
}

Estimate PathStats::survival(std::size_t n) const {
  return proportion_estimate(alive.at(n), static_cast<double>(replicates));
}

namespace {

struct PathBlock {
  PathStats stats;
};

}  // namespace

PathStats run_path_mc(const ValidatedModel& model, ReducedProcess process, std::size_t n, std::size_t replicates,
                      std::uint64_t seed, std::size_t workers, std::uint64_t start_z, std::size_t k_top,
                      const SimCaps& caps) {
  const Environment env = process == ReducedProcess::bpre_A   ? bpre_environment(model)
                          : process == ReducedProcess::bpre_B ? b_line_environment(model.params())
                                                              : gw_B_environment(model.params());
  const BpreSampler sampler(env, caps.max_parasites_per_cell, caps.explicit_sum_limit);
  const std::uint64_t z0 = process == ReducedProcess::bpre_A ? 1 : start_z;

  auto make = [&] {
    PathStats s;
    s.z.resize(n + 1);
    s.frequency.assign(n + 1, std::vector<double>(k_top + 1, 0.0));
    s.alive.assign(n + 1, 0.0);
    return s;
  };
  auto body = [&](std::size_t r, PathStats& acc) {
    RandomStream rng(seed, r);
    const ZPath path = sampler.run(n, z0, rng);
    ++acc.replicates;
    if (path.saturated) ++acc.saturated;
    for (std::size_t m = 0; m <= n; ++m) {
      const std::uint64_t z = path.z[m];
      if (z <= k_top) acc.frequency[m][z] += 1.0;
      if (z > 0) acc.alive[m] += 1.0;
      if (!path.saturated) acc.z[m].add(static_cast<double>(z));
    }
  };
  auto blocks = run_blocks<PathStats>(replicates, 256, workers, make, body);
  PathStats out = make();
  for (const auto& b : blocks) {
    out.replicates += b.replicates;
    out.saturated += b.saturated;
    for (std::size_t m = 0; m <= n; ++m) {
      out.z[m].merge(b.z[m]);
      out.alive[m] += b.alive[m];
      for (std::size_t k = 0; k <= k_top; ++k) out.frequency[m][k] += b.frequency[m][k];
    }
  }
  return out;
}

Estimate CellLineStats::prob_type_A(std::size_t n) const {
  return proportion_estimate(type_A.at(n), static_cast<double>(replicates));
}

Estimate CellLineStats::conditional_pmf_A(std::size_t n, std::size_t k) const {
  return proportion_estimate(z_given_A.at(n).at(k), type_A.at(n));
}

CellLineStats run_cell_line_mc(const ValidatedModel& model, std::size_t n, std::size_t replicates, std::uint64_t seed,
                               std::size_t workers, CellLineStep start, std::size_t k_top) {
  const SimEngine engine(model);
  auto make = [&] {
    CellLineStats s;
    s.type_A.assign(n + 1, 0.0);
    s.z_given_A.assign(n + 1, std::vector<double>(k_top + 1, 0.0));
    s.z.resize(n + 1);
    return s;
  };
  auto body = [&](std::size_t r, CellLineStats& acc) {
    RandomStream rng(seed, r);
    const CellLineTrajectory line = simulate_cell_line(engine, n, rng, start);
    ++acc.replicates;
    for (std::size_t m = 0; m <= n; ++m) {
      const auto& st = line.steps[m];
      if (!line.saturated) acc.z[m].add(static_cast<double>(st.z));
      if (st.type == CellType::A) {
        acc.type_A[m] += 1.0;
        if (st.z <= k_top) acc.z_given_A[m][st.z] += 1.0;
      }
    }
  };
  auto blocks = run_blocks<CellLineStats>(replicates, 256, workers, make, body);
  CellLineStats out = make();
  for (const auto& b : blocks) {
    out.replicates += b.replicates;
    for (std::size_t m = 0; m <= n; ++m) {
      out.type_A[m] += b.type_A[m];
      out.z[m].merge(b.z[m]);
      for (std::size_t k = 0; k <= k_top; ++k) out.z_given_A[m][k] += b.z_given_A[m][k];
    }
  }
  return out;
}

}  // namespace hostpar
