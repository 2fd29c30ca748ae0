#pragma once

#include "sunet/bounds.hpp"
#include "sunet/io.hpp"
#include "sunet/training.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sunet {

/// An experiment could not produce a meaningful result (exit status 1).
struct experiment_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SelectedParams {
  double s = 1, beta = 0, sigma = 0.1, N = 1, a1 = 1;
  int d = 1;
  int J = 1;
  int J_formula = 1;  // before the J >= 1 floor and any cap
  int r = 1;
  int R = 1;
  double S_filter_prescribed = 1;  // (12R + 1)^d
  int S_filter = 1;                // actually used: (2M)^d
  int M_prescribed = 1;            // 1 + 6R
  int M = 1;                       // min(M_prescribed, M cap)
  double kappa_tau = 0;
  double C_psi_L2 = 1;
  double C_psi_Hr = 1;
  double rho = 0;
  std::optional<double> gamma;  // sqrt(N) = sigma^{-2 gamma}
  double gamma_threshold = 0;
  std::string regime;  // oversampled | undersampled | indeterminate
  std::vector<std::string> deviations;

  NetClassParams class_params() const;
};

/// Parameter choice for given smoothness s, operator degree beta, noise
/// sigma, training size N, dimension d and symbol constant a1. J comes
/// from the balancing formula (natural log in rho and kappa_tau);
/// `J_override` > 0 replaces it, `J_cap` > 0 bounds it.
SelectedParams select_parameters(double s, double beta, double sigma, double N, int d, double a1, int M_cap = 10,
                                 int J_override = 0, int J_cap = 0);
Json to_json(const SelectedParams& p);

/// Detail-noise standard deviation per level when the first layer uses psi
/// and the coefficients are analysed with the scale-J father's filters:
/// nu_j = max_e ||sum_k w_k psi(. - k 2^{-J})|| with w the synthesis
/// weights of one unit detail coefficient. nu_j = 1 for psi = phi.
std::vector<double> detail_noise_levels(const GridFunction<double>& psi, int M, int J, const Grid& grid);

enum class ThresholdRule { Level, Global };
std::string to_string(ThresholdRule r);
ThresholdRule threshold_rule_from_string(const std::string& s);

/// Level: tau_j = sigma nu_j sqrt(2 j d ln 2); Global: sigma nu_j sqrt(2 J d ln 2).
std::vector<double> universal_thresholds(double sigma, const std::vector<double>& nu, int d, ThresholdRule rule);

/// The reference estimator for an operator: thresholding preset for the
/// identity, wavelet-vaguelette preset otherwise, with universal thresholds.
struct Reference {
  SUNet net;
  NetClassParams params;
  std::vector<double> nu;
  ThresholdRule rule = ThresholdRule::Level;
  // Where the preset needed looser class constants than the selection gave.
  std::vector<std::string> notes;
};

Reference make_reference(const SmoothingOperator& op, const SelectedParams& sel, double sigma, const Grid& grid,
                         Boundary boundary, std::optional<ThresholdRule> rule = std::nullopt);

struct SweepConfig {
  int d = 1;
  Eigen::Index grid_n = 2048;
  int op_L = 0;  // 0: identity, otherwise sobolev(L)
  PriorParams prior;
  double N = 1e12;  // parameter selection in the sigma sweep
  int train_N = 64;  // training-set size of the trained estimator in the sigma sweep
  std::vector<double> sigmas;
  std::vector<int> Ns;
  double sigma = 0.25;  // fixed noise of the N sweep
  int trials = 100;
  std::string estimator = "preset";  // preset | trained
  int J_override = 0;
  int J_cap = 0;
  int M_cap = 10;
  std::optional<ThresholdRule> rule;
  TrainConfig train;
  bool prescribed_rho = false;  // train with the selected rho instead of train.rho
  Boundary boundary = Boundary::Periodic;
  std::uint64_t seed = 1;

  SweepConfig();
  SmoothingOperator op(const Grid& grid) const;
};

struct SweepPoint {
  double x = 0;  // sigma or N
  SelectedParams params;
  RiskEstimate risk;
  std::optional<RiskEstimate> preset_risk;
  std::optional<TrainHistory> history;
};

struct SweepResult {
  std::string axis;  // sigma | N
  std::vector<SweepPoint> points;
  std::optional<double> slope, slope_lo, slope_hi;  // 95% interval from the OLS residuals
  double theory = 0;
  std::vector<std::string> monotonicity_violations;  // adjacent pairs beyond 2 pooled std-errors

  std::string to_csv() const;
  Json to_json() const;
};

struct LineFit {
  double slope = 0, intercept = 0, slope_se = 0;
};
/// Least squares y = a + b x; needs at least 2 points (3 for a std-error).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Risk against sigma for the preset or trained estimator; needs >= 4 sigmas.
SweepResult rate_sweep_sigma(const SweepConfig& cfg);

/// Trained-estimator risk against N at fixed sigma; needs >= 2 sizes, fits a
/// slope only with >= 4. All sizes share the test draws.
SweepResult rate_sweep_N(const SweepConfig& cfg);

struct StabilityConfig {
  int size_trials = 500;
  int perturbation_trials = 500;
  int distance_trials = 200;
  int risk_trials = 100;
  int risk_draws = 50;
  Boundary boundary = Boundary::Periodic;
  std::uint64_t seed = 1;
};

struct FamilyReport {
  std::string name;
  int trials = 0;
  int passed = 0;
  double worst_ratio = 0;  // max lhs / rhs over trials with rhs > 0
  double worst_margin = std::numeric_limits<double>::infinity();  // min rhs - lhs
  std::optional<Json> failure;  // first failing instance, replayable

  bool pass() const { return passed == trials; }
};

struct StabilityReport {
  std::vector<FamilyReport> families;
  // Size bounds on prior draws instead of white noise; informational.
  int smooth_trials = 0;
  int smooth_passed = 0;

  bool pass() const;
  Json to_json() const;
  std::string table() const;
};

StabilityReport stability_suite(const StabilityConfig& cfg);

/// Instance generators shared by the suite and the acceptance checks; trial
/// t of a family draws from CounterRng(seed).derive(family).derive(t).
struct BoundInstance {
  std::string family;  // size | perturbation | distance | risk
  std::uint64_t seed = 0;
  int trial = 0;
  SUNet net;
  std::optional<SUNet> other;  // distance
  GridFunction<double> input;  // grid signal (risk: the clean f)
  std::optional<ParamRef> target;
  Tensor filter_delta;
  double scalar_delta = 0;
  GridFunction<double> psi_delta;
  double sigma = 0;  // risk
  int draws = 0;     // risk
  int op_L = 0;      // risk
};

BoundInstance make_instance(const std::string& family, std::uint64_t seed, int trial, Boundary boundary,
                            int risk_draws = 50);
/// lhs/rhs for the instance; the risk family reports mean vs bound + 3 std-errors.
BoundCheck evaluate(const BoundInstance& inst);
Json to_json(const BoundInstance& inst);
BoundInstance instance_from_json(const Json& j);

struct OracleCheckReport {
  int roundtrip_cases = 0;
  double roundtrip_max_rel = 0;
  int equivalence_cases = 0;
  double equivalence_max_rel = 0;  // both boundary modes
  double equivalence_paper_max_rel = 0;

  bool pass() const { return roundtrip_max_rel <= 1e-10 && equivalence_max_rel <= 1e-10; }
  Json to_json() const;
};

/// DWT roundtrip (M 1..5, J <= 8, d 1..2, periodic) and preset/oracle
/// equivalence (M <= 5, J <= 6) on `cases` random instances each.
OracleCheckReport oracle_check(std::uint64_t seed, int cases = 100);

}  // namespace sunet
