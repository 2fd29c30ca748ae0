#pragma once

#include "sunet/forward_model.hpp"
#include "sunet/grid.hpp"
#include "sunet/rng.hpp"
#include "sunet/tensor.hpp"

#include <limits>
#include <string>
#include <vector>

namespace sunet {

/// Constants of the constrained network class.
struct NetClassParams {
  int r = 1;
  int R = 1;
  int S_filter = 4;
  double kappa_tau = 1;
  double C_psi_L2 = 1;
  double C_psi_Hr = std::numeric_limits<double>::infinity();

  void validate(int d) const;
};

/// Simplified U-net: first-layer filter psi, J contracting levels with
/// filters alpha^(j), beta^(j),e, soft-threshold activations tau_j on the
/// detail channels, J expanding levels with a^(j), b^(j),e, and a fixed
/// synthesis filter phi. Index j runs 0 (coarsest) .. J-1 everywhere.
struct SUNet {
  int J = 1;
  int dim = 1;
  int M = 2;  // vanishing moments of the father behind phi
  Boundary boundary = Boundary::Periodic;
  Grid grid;
  std::vector<Tensor> alpha, a;
  std::vector<std::vector<Tensor>> beta, b;
  std::vector<double> tau;
  GridFunction<double> psi, phi;

  int channels() const { return (1 << dim) - 1; }

  /// Throws std::invalid_argument describing the first structural problem.
  void validate() const;
};

/// Every intermediate tensor of one forward pass.
struct ForwardTrace {
  bool from_signal = false;
  GridFunction<double> input;  // grid signal when from_signal
  std::vector<Tensor> s, sbar;  // index 0..J
  std::vector<std::vector<Tensor>> d, dbar;  // index 0..J-1
  GridFunction<double> output;
};

struct NetGradient {
  std::vector<Tensor> alpha, a;
  std::vector<std::vector<Tensor>> beta, b;
  std::vector<double> tau;
  GridFunction<double> psi;
};

/// Trainable parameter groups, addressed by (group, level, channel).
enum class ParamGroup { Alpha, A, Beta, B, Tau, Psi };

struct ParamRef {
  ParamGroup group = ParamGroup::Alpha;
  int level = 0;
  int channel = 0;
};

std::string to_string(ParamGroup g);
ParamGroup param_group_from_string(const std::string& s);
std::string to_string(const ParamRef& p);

/// s_k = h^d sum_x g(x) psi(x - k 2^{-J}) for k in [0, 2^J)^d, periodic shifts.
Tensor first_layer(const GridFunction<double>& signal, const GridFunction<double>& psi, int J, const Grid& grid);

/// Full pass from a grid signal.
ForwardTrace forward(const SUNet& net, const GridFunction<double>& signal);

/// Pass from precomputed finest-scale coefficients s^(J), skipping the first layer.
ForwardTrace forward(const SUNet& net, const Tensor& s_J);

/// Gradients of 0.5 ||F - f||^2 (quadrature norm) given residual = F - f.
/// The psi gradient is zero when the trace came from coefficient input.
NetGradient backward(const SUNet& net, const ForwardTrace& trace, const GridFunction<double>& residual);

NetGradient zero_gradient(const SUNet& net);
void accumulate(NetGradient& into, const NetGradient& g, double scale = 1.0);
double squared_norm(const NetGradient& g);
/// net += scale * g over every trainable field.
void apply_step(SUNet& net, const NetGradient& g, double scale);

/// Every trainable parameter group of a net: alpha/a/beta/b per level and
/// channel, tau_j, psi.
std::vector<ParamRef> parameter_groups(const SUNet& net);
Tensor& filter(SUNet& net, const ParamRef& p);
const Tensor& filter(const SUNet& net, const ParamRef& p);
const Tensor& filter(const NetGradient& g, const ParamRef& p);

/// Truncates supports to S_filter largest taps (ties to lowest index),
/// rescales filters to l2 norm <= 1, clamps tau_j to [0, kappa_tau], and
/// rescales psi to quadrature norm <= C_psi_L2 (and back to C_psi_Hr when
/// its Sobolev proxy exceeds the cap by more than 5%). Feasible nets come
/// back bitwise unchanged.
SUNet project_constraints(const SUNet& net, const NetClassParams& params);

/// Class-membership problems (empty when feasible). The Sobolev cap is
/// checked on a quadrature proxy with 5% tolerance.
std::vector<std::string> class_violations(const SUNet& net, const NetClassParams& params);

/// Wavelet soft-thresholding as an SU-net: alpha_r = a_r = h[-r],
/// beta_r = b_r = g[-r], psi = phi = scale-J father.
SUNet preset_wavelet_thresholding(int M, int J, const std::vector<double>& taus, const Grid& grid,
                                  Boundary boundary = Boundary::Periodic);

/// Wavelet-vaguelette estimator: the thresholding preset with psi replaced by
/// the vaguelette of `op`.
SUNet preset_wvd(const SmoothingOperator& op, int M, int J, const std::vector<double>& taus, const Grid& grid,
                 Boundary boundary = Boundary::Periodic);

/// Class constants under which a preset is feasible: S_filter = (2M)^d,
/// C_psi_L2 = max(1, ||psi||), C_psi_Hr = ||psi||_{H^r}.
NetClassParams preset_class_params(const SUNet& net, double kappa_tau, int r);

struct RandomNetSpec {
  int J = 3;
  int dim = 1;
  int M = 3;     // father behind phi (and the psi baseline)
  int taps = 4;  // per axis
  double kappa_tau = 1;
  double psi_noise = 0.3;  // relative size of the random psi perturbation
  Boundary boundary = Boundary::Periodic;
};

/// Gaussian filter taps on [-(taps-1), 0]^d scaled to norm U(0, 1], tau_j
/// uniform on [0, kappa_tau], psi = father plus a white perturbation,
/// rescaled to norm <= 1.
SUNet random_feasible_net(const RandomNetSpec& spec, const Grid& grid, CounterRng& rng);

}  // namespace sunet
