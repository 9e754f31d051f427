#include "hostpar/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "hostpar/golden_section.hpp"

namespace hostpar {

namespace {

constexpr double kNormTol = 1e-12;

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

// w * log(m) with 0 * log(0) = 0 and w * log(0) = -inf for w > 0.
double weighted_log(double w, double m) {
  if (w == 0.0) return 0.0;
  if (m == 0.0) return -std::numeric_limits<double>::infinity();
  return w * std::log(m);
}

double xlogx(double m) { return m == 0.0 ? 0.0 : m * std::log(m); }

}  // namespace

const char* to_string(CellType t) { return t == CellType::A ? "A" : "B"; }

const char* to_string(DaughterPair s) {
  switch (s) {
    case DaughterPair::AA: return "AA";
    case DaughterPair::AB: return "AB";
    case DaughterPair::BB: return "BB";
  }
  return "?";
}

AssumptionViolated::AssumptionViolated(std::vector<std::string> names)
    : ModelError("assumption violated: " + join(names)), names_(std::move(names)) {}

double pmf_mean(std::span<const double> pmf) {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  return m;
}

// ---------------------------------------------------------------------------
// JointOffspringLaw

JointOffspringLaw::JointOffspringLaw() : JointOffspringLaw(std::vector<SupportPoint>{{1, 1, 1.0}}) {}

JointOffspringLaw::JointOffspringLaw(std::vector<SupportPoint> support) : support_(std::move(support)) {
  std::uint64_t top[2] = {0, 0};
  for (const auto& s : support_) {
    top[0] = std::max(top[0], s.x0);
    top[1] = std::max(top[1], s.x1);
  }
  for (int i = 0; i < 2; ++i) marginal_[i].assign(top[i] + 1, 0.0);
  for (const auto& s : support_) {
    marginal_[0][s.x0] += s.p;
    marginal_[1][s.x1] += s.p;
  }
  for (int i = 0; i < 2; ++i) mean_[i] = pmf_mean(marginal_[i]);
}

JointOffspringLaw JointOffspringLaw::from_support(std::vector<SupportPoint> support, std::string_view name) {
  const std::string law(name);
  if (support.empty()) throw NormalizationError(law, "empty support");
  double total = 0.0;
  for (const auto& s : support) {
    if (!(s.p >= 0.0) || !std::isfinite(s.p)) {
      throw NormalizationError(law, "negative or non-finite probability");
    }
    total += s.p;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total;
    throw NormalizationError(law, os.str());
  }
  auto sorted = support;
  std::sort(sorted.begin(), sorted.end(), [](const SupportPoint& a, const SupportPoint& b) {
    return std::tie(a.x0, a.x1) < std::tie(b.x0, b.x1);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].x0 == sorted[i - 1].x0 && sorted[i].x1 == sorted[i - 1].x1) {
      throw NormalizationError(law, "duplicate support point (" + std::to_string(sorted[i].x0) + ", " +
                                        std::to_string(sorted[i].x1) + ")");
    }
  }
  // Caller order is kept so that a written-then-parsed model is field-exact.
  return JointOffspringLaw(std::move(support));
}

JointOffspringLaw JointOffspringLaw::independent(const std::vector<double>& m0, const std::vector<double>& m1,
                                                 std::string_view name) {
  std::vector<SupportPoint> support;
  for (std::size_t a = 0; a < m0.size(); ++a) {
    for (std::size_t b = 0; b < m1.size(); ++b) {
      const double p = m0[a] * m1[b];
      if (p > 0.0) support.push_back({a, b, p});
    }
  }
  return from_support(std::move(support), name);
}

JointOffspringLaw JointOffspringLaw::point_mass(std::uint64_t x0, std::uint64_t x1) {
  return JointOffspringLaw(std::vector<SupportPoint>{{x0, x1, 1.0}});
}

double JointOffspringLaw::prob_zero(int child) const { return marginal_[child][0]; }

double JointOffspringLaw::prob_both_at_most_one() const {
  double p = 0.0;
  for (const auto& s : support_) {
    if (s.x0 <= 1 && s.x1 <= 1) p += s.p;
  }
  return p;
}

std::uint64_t JointOffspringLaw::max_value() const {
  return std::max(marginal_[0].size(), marginal_[1].size()) - 1;
}

std::vector<double> JointOffspringLaw::sum_law() const {
  std::vector<double> out(marginal_[0].size() + marginal_[1].size() - 1, 0.0);
  for (const auto& s : support_) out[s.x0 + s.x1] += s.p;
  while (out.size() > 1 && out.back() == 0.0) out.pop_back();
  return out;
}

JointOffspringLaw JointOffspringLaw::truncated(std::uint64_t n) const {
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> merged;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> order;
  for (const auto& s : support_) {
    const auto key = std::make_pair(s.x0 > n ? 0 : s.x0, s.x1 > n ? 0 : s.x1);
    auto [it, inserted] = merged.emplace(key, 0.0);
    if (inserted) order.push_back(key);
    it->second += s.p;
  }
  std::vector<SupportPoint> out;
  for (const auto& key : order) out.push_back({key.first, key.second, merged[key]});
  return JointOffspringLaw(std::move(out));
}

// ---------------------------------------------------------------------------
// ModelParams / validation

double ModelParams::pair_prob(DaughterPair s) const {
  switch (s) {
    case DaughterPair::AA: return p_AA;
    case DaughterPair::AB: return p_AB;
    case DaughterPair::BB: return p_BB;
  }
  return 0.0;
}

const JointOffspringLaw& ModelParams::law_A(DaughterPair s) const {
  switch (s) {
    case DaughterPair::AA: return law_A_AA;
    case DaughterPair::AB: return law_A_AB;
    case DaughterPair::BB: return law_A_BB;
  }
  return law_A_BB;
}

double expected_contaminated_B_daughters(const ModelParams& p, std::uint64_t z) {
  const double zd = static_cast<double>(z);
  auto contaminated = [&](const JointOffspringLaw& law, int child) {
    return 1.0 - std::pow(law.prob_zero(child), zd);
  };
  return p.p_AB * contaminated(p.law_A_AB, 1) +
         p.p_BB * (contaminated(p.law_A_BB, 0) + contaminated(p.law_A_BB, 1));
}

bool Validation::violates(std::string_view name) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.name == name; });
}

const ValidatedModel& Validation::value() const {
  if (model) return *model;
  for (const auto& v : violations) {
    if (v.name == "normalization") throw NormalizationError("cell-type probabilities", v.detail);
  }
  std::vector<std::string> names;
  for (const auto& v : violations) names.push_back(v.name);
  throw AssumptionViolated(std::move(names));
}

Validation validate(const ModelParams& p, ValidationOptions options) {
  Validation out;
  auto fail = [&](std::string name, std::string detail) {
    out.violations.push_back({std::move(name), std::move(detail)});
  };

  const double probs[3] = {p.p_AA, p.p_AB, p.p_BB};
  bool finite = true;
  for (double q : probs) finite = finite && std::isfinite(q) && q >= 0.0;
  if (!finite) {
    fail("normalization", "cell-type probabilities must be finite and nonnegative");
  } else if (std::abs(p.p_AA + p.p_AB + p.p_BB - 1.0) > kNormTol) {
    fail("normalization", "p_AA + p_AB + p_BB != 1");
  }

  if (!(p.p_AA < 1.0)) fail("SA2", "p_AA must be < 1");

  const bool waive_aa = options.relaxed && p.p_AA == 0.0;
  if (!waive_aa && !(p.law_A_AA.prob_both_at_most_one() < 1.0)) {
    fail("SA3", "P(X0(A,AA) <= 1, X1(A,AA) <= 1) must be < 1");
  }
  if (!(p.law_B.prob_both_at_most_one() < 1.0)) {
    fail("SA4", "P(X0(B) <= 1, X1(B) <= 1) must be < 1");
  }

  std::vector<std::string> sa5;
  if (!waive_aa) {
    if (!(p.law_A_AA.mean(0) > 0.0)) sa5.emplace_back("mu_0A(AA) = 0");
    if (!(p.law_A_AA.mean(1) > 0.0)) sa5.emplace_back("mu_1A(AA) = 0");
  }
  if (!(p.law_B.mean(0) > 0.0)) sa5.emplace_back("mu_0B = 0");
  if (!(p.law_B.mean(1) > 0.0)) sa5.emplace_back("mu_1B = 0");
  if (!(expected_contaminated_B_daughters(p, 1) > 0.0)) sa5.emplace_back("E #G*_1(B) = 0");
  if (!sa5.empty()) fail("SA5", join(sa5));

  if (out.violations.empty()) out.model = ValidatedModel(p, options.relaxed);
  return out;
}

// ---------------------------------------------------------------------------
// Derived quantities

namespace {

struct AMeans {
  double m0_AA, m1_AA, m0_AB;
};

AMeans a_means(const ModelParams& p) {
  return {p.law_A_AA.mean(0), p.law_A_AA.mean(1), p.law_A_AB.mean(0)};
}

double nu_of(const ModelParams& p) { return 2.0 * p.p_AA + p.p_AB; }

double phi_raw(const ModelParams& p, double theta) {
  const double nu = nu_of(p);
  const auto m = a_means(p);
  return (p.p_AA / nu) * (std::pow(m.m0_AA, theta) + std::pow(m.m1_AA, theta)) +
         (p.p_AB / nu) * std::pow(m.m0_AB, theta);
}

}  // namespace

double phi(const ValidatedModel& model, double theta) {
  const auto& p = model.params();
  if (nu_of(p) == 0.0) throw DegenerateModel("nu = 0: no A-daughters possible");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("phi: theta must lie in [0, 1]");
  return phi_raw(p, theta);
}

PhiMinimum minimize_phi(const ValidatedModel& model, double tol) {
  const auto& p = model.params();
  if (nu_of(p) == 0.0) throw DegenerateModel("nu = 0: no A-daughters possible");
  if (!(tol > 0.0)) throw std::invalid_argument("minimize_phi: tol must be positive");
  const auto best = golden_section_minimize([&](double t) { return phi_raw(p, t); }, 0.0, 1.0, tol);
  return {best.x, best.fx};
}

DerivedQuantities derive(const ValidatedModel& model) {
  const auto& p = model.params();
  DerivedQuantities d;
  const auto m = a_means(p);
  d.nu = nu_of(p);
  d.gamma = p.p_AA * (m.m0_AA + m.m1_AA) + p.p_AB * m.m0_AB;
  d.gamma_hat = p.p_AA * (m.m0_AA * m.m0_AA + m.m1_AA * m.m1_AA) + p.p_AB * m.m0_AB * m.m0_AB;
  d.mu_0B = p.law_B.mean(0);
  d.mu_1B = p.law_B.mean(1);
  d.mu_B = d.mu_0B + d.mu_1B;
  d.mu_B_product = d.mu_0B * d.mu_1B;
  d.supc_product = std::pow(m.m0_AA, p.p_AA) * std::pow(m.m1_AA, p.p_AA) * std::pow(m.m0_AB, p.p_AB);
  d.B_sslog = xlogx(d.mu_0B) + xlogx(d.mu_1B);

  const auto indicator = [](const JointOffspringLaw& law, int child) { return law.prob_zero(child) < 1.0 ? 1.0 : 0.0; };
  d.beta = p.p_AB * indicator(p.law_A_AB, 1) +
           p.p_BB * (indicator(p.law_A_BB, 0) + indicator(p.law_A_BB, 1));
  d.eta = 0.5 * (p.p_BB * p.law_A_BB.mean(0) + p.p_AB * p.law_A_AB.mean(1) + p.p_BB * p.law_A_BB.mean(1));
  d.ab_flux = 2.0 * d.eta;

  if (d.nu > 0.0) {
    const double w_aa = p.p_AA / d.nu;
    const double w_ab = p.p_AB / d.nu;
    d.E_log_gprime = weighted_log(w_aa, m.m0_AA) + weighted_log(w_aa, m.m1_AA) + weighted_log(w_ab, m.m0_AB);
    d.E_gprime_log_gprime = w_aa * (xlogx(m.m0_AA) + xlogx(m.m1_AA)) + w_ab * xlogx(m.m0_AB);
    const auto pm = minimize_phi(model);
    d.phi_min = pm.phi_min;
    d.theta_star = pm.theta_star;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Classification

const char* to_string(BpreClass c) {
  switch (c) {
    case BpreClass::supercritical: return "supercritical";
    case BpreClass::critical: return "critical";
    case BpreClass::subcritical_strong: return "subcritical_strong";
    case BpreClass::subcritical_intermediate: return "subcritical_intermediate";
    case BpreClass::subcritical_weak: return "subcritical_weak";
    case BpreClass::not_applicable: return "not_applicable";
  }
  return "?";
}

const char* to_string(Kappa k) {
  switch (k) {
    case Kappa::zero: return "0";
    case Kappa::half: return "0.5";
    case Kappa::three_halves: return "1.5";
    case Kappa::not_applicable: return "not_applicable";
  }
  return "?";
}

double kappa_value(Kappa k) {
  switch (k) {
    case Kappa::zero: return 0.0;
    case Kappa::half: return 0.5;
    case Kappa::three_halves: return 1.5;
    case Kappa::not_applicable: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

// Three-way comparison with a tolerance band; ties are recorded as marginal.
class Comparator {
 public:
  Comparator(double tol, std::vector<std::string>& marginal) : tol_(tol), marginal_(marginal) {}

  int cmp(const char* name, double x, double threshold) {
    if (std::isinf(x)) return x > 0 ? 1 : -1;
    const double diff = x - threshold;
    if (std::abs(diff) <= tol_) {
      if (std::find(marginal_.begin(), marginal_.end(), name) == marginal_.end()) marginal_.emplace_back(name);
      return 0;
    }
    return diff > 0 ? 1 : -1;
  }

 private:
  double tol_;
  std::vector<std::string>& marginal_;
};

}  // namespace

RegimeReport classify(const ValidatedModel& model, double tol) {
  const auto& p = model.params();
  RegimeReport r;
  r.derived = derive(model);
  const auto& d = r.derived;
  Comparator c(tol, r.marginal);

  const int nu_vs_1 = c.cmp("nu vs 1", d.nu, 1.0);

  if (p.p_AA == 0.0) {
    // Single A-line: Galton-Watson with offspring law X0(A,AB) when nu = 1.
    const bool delta_one = p.law_A_AB.marginal(0).size() == 2 && p.law_A_AB.marginal(0)[1] == 1.0;
    if (nu_vs_1 < 0) {
      r.a_parasites_as_extinction = true;
    } else if (delta_one) {
      r.a_parasites_as_extinction = false;
      r.marginal.emplace_back("X0(A,AB) is the point mass at 1");
    } else {
      r.a_parasites_as_extinction = c.cmp("mu_0A(AB) vs 1", p.law_A_AB.mean(0), 1.0) <= 0;
    }
  } else if (nu_vs_1 <= 0) {
    r.a_parasites_as_extinction = true;
  } else {
    const bool elog_neg = c.cmp("E log g'(1) vs 0", *d.E_log_gprime, 0.0) < 0;
    const bool phi_small = c.cmp("phi_min vs 1/nu", *d.phi_min, 1.0 / d.nu) <= 0;
    r.a_parasites_as_extinction = elog_neg && phi_small;
  }

  r.all_parasites_as_extinction = r.a_parasites_as_extinction && c.cmp("mu_B vs 1", d.mu_B, 1.0) <= 0;

  if (d.E_log_gprime) {
    const double elog = *d.E_log_gprime;
    const int s = c.cmp("E log g'(1) vs 0", elog, 0.0);
    if (s > 0) {
      r.bpre_class = BpreClass::supercritical;
    } else if (s == 0) {
      r.bpre_class = BpreClass::critical;
    } else {
      const int w = std::isinf(elog) ? -1 : c.cmp("E g'(1) log g'(1) vs 0", *d.E_gprime_log_gprime, 0.0);
      if (w < 0) {
        r.bpre_class = BpreClass::subcritical_strong;
        r.kappa = Kappa::zero;
      } else if (w == 0) {
        r.bpre_class = BpreClass::subcritical_intermediate;
        r.kappa = Kappa::half;
      } else {
        r.bpre_class = BpreClass::subcritical_weak;
        r.kappa = Kappa::three_halves;
      }
    }
    r.LA_trivial = s <= 0 || nu_vs_1 <= 0;
  } else {
    r.LA_trivial = true;
  }

  r.L_trivial = c.cmp("mu_0B mu_1B vs 1", d.mu_B_product, 1.0) <= 0;
  r.thm31_applies = !r.L_trivial;
  r.thm32_applies = c.cmp("supc_product vs 1", d.supc_product, 1.0) > 0;
  r.thm32c_applies = r.thm32_applies && c.cmp("mu_B vs gamma", d.mu_B, d.gamma) > 0 &&
                     c.cmp("B_sslog vs 0", d.B_sslog, 0.0) < 0;
  r.w_L2_bounded = c.cmp("gamma vs 1", d.gamma, 1.0) > 0 && c.cmp("gamma_hat vs gamma", d.gamma_hat, d.gamma) <= 0;
  return r;
}

// ---------------------------------------------------------------------------

Validation truncate(const ValidatedModel& model, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("truncate: N must be >= 1");
  ModelParams p = model.params();
  p.law_A_AA = p.law_A_AA.truncated(n);
  p.law_A_AB = p.law_A_AB.truncated(n);
  p.law_A_BB = p.law_A_BB.truncated(n);
  return validate(p, ValidationOptions{model.relaxed()});
}

double Environment::mean() const {
  double m = 0.0;
  for (const auto& c : components) m += c.weight * pmf_mean(c.pmf);
  return m;
}

double Environment::total_weight() const {
  double w = 0.0;
  for (const auto& c : components) w += c.weight;
  return w;
}

Environment bpre_environment(const ValidatedModel& model) {
  const auto& p = model.params();
  const double nu = nu_of(p);
  if (nu == 0.0) throw DegenerateModel("nu = 0: the A-line environment is undefined");
  Environment env;
  if (p.p_AA > 0.0) {
    env.components.push_back({p.p_AA / nu, p.law_A_AA.marginal(0), "X0(A,AA)"});
    env.components.push_back({p.p_AA / nu, p.law_A_AA.marginal(1), "X1(A,AA)"});
  }
  if (p.p_AB > 0.0) env.components.push_back({p.p_AB / nu, p.law_A_AB.marginal(0), "X0(A,AB)"});
  return env;
}

Environment b_line_environment(const ModelParams& p) {
  Environment env;
  env.components.push_back({0.5, p.law_B.marginal(0), "X0(B)"});
  env.components.push_back({0.5, p.law_B.marginal(1), "X1(B)"});
  return env;
}

}  // namespace hostpar
