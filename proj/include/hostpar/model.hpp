#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hostpar {

enum class CellType : std::uint8_t { A, B };

// Daughter-type pair of a dividing cell. AB means daughter 0 is A and
// daughter 1 is B; (B, A) has probability zero and is not representable.
enum class DaughterPair : std::uint8_t { AA, AB, BB };

constexpr CellType daughter_type(DaughterPair s, int child) {
  switch (s) {
    case DaughterPair::AA: return CellType::A;
    case DaughterPair::AB: return child == 0 ? CellType::A : CellType::B;
    case DaughterPair::BB: return CellType::B;
  }
  return CellType::B;
}

const char* to_string(CellType t);
const char* to_string(DaughterPair s);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NormalizationError : public ModelError {
 public:
  NormalizationError(std::string what_law, const std::string& detail)
      : ModelError("normalization error in " + what_law + ": " + detail),
        law_(std::move(what_law)) {}
  const std::string& law() const { return law_; }

 private:
  std::string law_;
};

class AssumptionViolated : public ModelError {
 public:
  explicit AssumptionViolated(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

class DegenerateModel : public ModelError {
 public:
  using ModelError::ModelError;
};

struct SupportPoint {
  std::uint64_t x0 = 0;
  std::uint64_t x1 = 0;
  double p = 0.0;

  friend bool operator==(const SupportPoint&, const SupportPoint&) = default;
};

/// Finite-support joint law of the pair (X0, X1): offspring of one parasite
/// shared into daughter 0 and daughter 1.
class JointOffspringLaw {
 public:
  /// Point mass at (1, 1).
  JointOffspringLaw();

  /// Throws NormalizationError if a probability is negative, the total is not
  /// 1 within 1e-12, or two entries share the same (x0, x1).
  static JointOffspringLaw from_support(std::vector<SupportPoint> support,
                                        std::string_view name = "law");

  /// Product law of two independent marginals given as pmf vectors.
  static JointOffspringLaw independent(const std::vector<double>& marginal0,
                                       const std::vector<double>& marginal1,
                                       std::string_view name = "law");

  static JointOffspringLaw point_mass(std::uint64_t x0, std::uint64_t x1);

  std::span<const SupportPoint> support() const { return support_; }
  const std::vector<double>& marginal(int child) const { return marginal_[child]; }
  double mean(int child) const { return mean_[child]; }
  double prob_zero(int child) const;
  double prob_both_at_most_one() const;
  std::uint64_t max_value() const;

  /// Pmf of X0 + X1.
  std::vector<double> sum_law() const;

  /// Coordinates above n are mapped to 0; coinciding support points merge.
  JointOffspringLaw truncated(std::uint64_t n) const;

  friend bool operator==(const JointOffspringLaw& a, const JointOffspringLaw& b) {
    return a.support_ == b.support_;
  }

 private:
  explicit JointOffspringLaw(std::vector<SupportPoint> support);

  std::vector<SupportPoint> support_;
  std::vector<double> marginal_[2];
  double mean_[2] = {0.0, 0.0};
};

struct ModelParams {
  double p_AA = 0.0;
  double p_AB = 0.0;
  double p_BB = 0.0;
  JointOffspringLaw law_A_AA;
  JointOffspringLaw law_A_AB;
  JointOffspringLaw law_A_BB;
  JointOffspringLaw law_B;

  double pair_prob(DaughterPair s) const;
  const JointOffspringLaw& law_A(DaughterPair s) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Violation {
  std::string name;  // "normalization", "SA2", ..., "SA5"
  std::string detail;
};

struct ValidationOptions {
  // Waive SA3 and the AA-mean part of SA5 when p_AA = 0 (those laws never act).
  bool relaxed = false;
};

class ValidatedModel {
 public:
  const ModelParams& params() const { return params_; }
  const ModelParams* operator->() const { return &params_; }
  bool relaxed() const { return relaxed_; }

 private:
  friend struct Validation validate(const ModelParams&, ValidationOptions);
  ValidatedModel(ModelParams p, bool relaxed) : params_(std::move(p)), relaxed_(relaxed) {}

  ModelParams params_;
  bool relaxed_ = false;
};

struct Validation {
  std::optional<ValidatedModel> model;
  std::vector<Violation> violations;

  bool ok() const { return model.has_value(); }
  bool violates(std::string_view name) const;
  /// Returns the model or throws NormalizationError / AssumptionViolated.
  const ValidatedModel& value() const;
};

Validation validate(const ModelParams& params, ValidationOptions options = {});

/// E_{z,A} #G*_1(B): expected number of contaminated B-daughters of an A-cell
/// hosting z parasites.
double expected_contaminated_B_daughters(const ModelParams& params, std::uint64_t z);

// ---------------------------------------------------------------------------
// Derived quantities and regime classification

struct DerivedQuantities {
  double nu = 0.0;
  double gamma = 0.0;
  double gamma_hat = 0.0;
  double mu_0B = 0.0;
  double mu_1B = 0.0;
  double mu_B = 0.0;
  double mu_B_product = 0.0;
  // Empty when nu = 0 (no A-daughters possible). E_log_gprime may be -inf.
  std::optional<double> E_log_gprime;
  std::optional<double> E_gprime_log_gprime;
  std::optional<double> phi_min;
  std::optional<double> theta_star;
  double supc_product = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double ab_flux = 0.0;
  double B_sslog = 0.0;
};

DerivedQuantities derive(const ValidatedModel& model);

/// theta -> E g'(1)^theta for the A-line environment; convex on [0, 1].
double phi(const ValidatedModel& model, double theta);

struct PhiMinimum {
  double theta_star = 0.0;
  double phi_min = 1.0;
};

PhiMinimum minimize_phi(const ValidatedModel& model, double tol = 1e-10);

enum class BpreClass {
  supercritical,
  critical,
  subcritical_strong,
  subcritical_intermediate,
  subcritical_weak,
  not_applicable,
};

enum class Kappa { zero, half, three_halves, not_applicable };

const char* to_string(BpreClass c);
const char* to_string(Kappa k);
double kappa_value(Kappa k);  // NaN for not_applicable

struct RegimeReport {
  bool a_parasites_as_extinction = false;
  bool all_parasites_as_extinction = false;
  BpreClass bpre_class = BpreClass::not_applicable;
  Kappa kappa = Kappa::not_applicable;
  bool LA_trivial = false;
  bool L_trivial = false;
  bool thm31_applies = false;
  bool thm32_applies = false;
  bool thm32c_applies = false;
  bool w_L2_bounded = false;
  // Names of comparisons whose operands were within the tolerance of the
  // threshold; the reported side is then the non-strict one.
  std::vector<std::string> marginal;
  DerivedQuantities derived;

  bool numerically_marginal() const { return !marginal.empty(); }
};

RegimeReport classify(const ValidatedModel& model, double tol = 1e-9);

/// Moves every per-parasite offspring value above n to 0 in the three A-mother
/// laws; law_B and the cell-split probabilities are unchanged.
Validation truncate(const ValidatedModel& model, std::uint64_t n);

struct EnvironmentComponent {
  double weight = 0.0;
  std::vector<double> pmf;
  std::string label;
};

/// Law of one environment draw: a finite mixture of offspring pmfs.
struct Environment {
  std::vector<EnvironmentComponent> components;

  double mean() const;
  double total_weight() const;
};

/// Environment of the A-line BPRE: marginals 0 and 1 of law_A_AA with weight
/// p_AA / nu each and marginal 0 of law_A_AB with weight p_AB / nu.
Environment bpre_environment(const ValidatedModel& model);

/// Environment of the B-line BPRE: both marginals of law_B, weight 1/2 each.
Environment b_line_environment(const ModelParams& params);

double pmf_mean(std::span<const double> pmf);

}  // namespace hostpar
