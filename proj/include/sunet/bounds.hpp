#pragma once

#include "sunet/forward_model.hpp"
#include "sunet/network.hpp"

#include <string>
#include <vector>

namespace sunet {

/// One inequality lhs <= rhs, checked with relative slack 1e-8 plus an
/// absolute roundoff floor.
struct BoundCheck {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool pass = true;

  double margin() const { return rhs - lhs; }
};

BoundCheck make_check(std::string name, double lhs, double rhs, double floor = 0);

struct BoundReport {
  double c_max = 0;
  std::vector<BoundCheck> checks;

  bool pass() const;
  /// Smallest rhs - lhs over all checks (infinity when empty).
  double worst_margin() const;
  const BoundCheck* first_failure() const;
};

/// max_k |s_k|: stand-in for |<f, psi>| in the size and perturbation bounds.
double max_coefficient(const Tensor& s);

/// Per level j (0 = coarsest), with B = 2^{Jd/2} c_max:
/// ||s^(j)|| <= B, ||d^(j),e|| <= B, ||dbar^(j),e|| <= ||d^(j),e||,
/// ||sbar^(j)|| <= (1 + 2^d j) B.
BoundReport verify_size_bounds(const SUNet& net, const ForwardTrace& trace, double c_max);

/// Copy of `net` with one parameter group moved by delta.
SUNet perturbed(const SUNet& net, const ParamRef& target, const Tensor& delta);
SUNet perturbed(const SUNet& net, const ParamRef& target, double delta);
SUNet perturbed(const SUNet& net, const ParamRef& target, const GridFunction<double>& delta);

/// lhs = ||F(f) - F_Delta(f)||, rhs from the per-group constants:
///   alpha^(k), a^(k):  (1 + 2^d k) ||Delta|| ||phi|| B
///   beta^(k),e, b^(k),e:  ||Delta|| ||phi|| B
///   tau_k:  2^{Jd/2} 2^d ||phi|| |Delta|
///   psi:  (1 + 2^d J) ||phi|| 2^{Jd/2} max_k |first_layer(f, Delta)_k|
BoundCheck verify_perturbation_bounds(const SUNet& net, const ParamRef& target, const Tensor& delta,
                                      const GridFunction<double>& input);
BoundCheck verify_perturbation_bounds(const SUNet& net, const ParamRef& target, double delta,
                                      const GridFunction<double>& input);
BoundCheck verify_perturbation_bounds(const SUNet& net, const ParamRef& target, const GridFunction<double>& delta,
                                      const GridFunction<double>& input);

/// The right-hand side alone, for a filter perturbation of norm `delta_norm`.
double perturbation_rhs(const SUNet& net, const ParamRef& target, double delta_norm, double c_max);

/// ||F(f) - G(f)|| against the sum of per-group difference terms. The psi
/// term is taken first; every filter and threshold term then uses c_max of
/// G's psi, since the telescoping runs through nets that already carry it.
BoundCheck verify_net_distance_bound(const SUNet& F, const SUNet& G, const GridFunction<double>& input);

struct RiskBoundCheck {
  double mean = 0;    // Monte Carlo estimate of E_W ||F(Tf + sigma dW) - f||^2
  double std_error = 0;
  double bound = 0;   // 2||f||^2 + 4 2^{Jd} ||psi||^2 (2^d J + 1)^2 (||f||^2 C_T^2 + sigma^2)
  bool pass = true;   // mean <= bound + 3 std_error
};

RiskBoundCheck verify_risk_bound(const SUNet& net, const SmoothingOperator& op, const GridFunction<double>& f,
                                 double sigma, int draws, CounterRng& rng);

}  // namespace sunet
