#pragma once

#include "sunet/fourier.hpp"
#include "sunet/grid.hpp"
#include "sunet/rng.hpp"
#include "sunet/wavelets.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sunet {

struct singular_operator : std::domain_error {
  using std::domain_error::domain_error;
};

/// Periodic translation-invariant operator given by its Fourier symbol on the
/// grid wavenumbers (xi = 2 pi k, k in [-n/2, n/2) per axis).
struct SmoothingOperator {
  enum class Kind { Identity, Sobolev, Custom };

  Kind kind = Kind::Identity;
  int L = 0;
  double beta = 0;
  Grid grid;
  GridFunction<double> symbol;  // FFT bin layout
  // Envelope a1 <= |symbol| (1 + |xi|^2)^{beta/2} <= a2 over the grid, and C_T = max |symbol|.
  double a1 = 1, a2 = 1, C_T = 1;

  static SmoothingOperator identity(const Grid& grid) { return make(Kind::Identity, 0, 0, grid, {}); }

  /// Symbol (1 + |xi|^2)^{-L}; a 2L-smoothing operator.
  static SmoothingOperator sobolev(int L, const Grid& grid) {
    if (L < 1) throw std::invalid_argument("SmoothingOperator::sobolev: L must be positive");
    return make(Kind::Sobolev, L, 2.0 * L, grid, {});
  }

  static SmoothingOperator custom(GridFunction<double> symbol, double beta, const Grid& grid) {
    grid.require(symbol, "SmoothingOperator::custom");
    return make(Kind::Custom, 0, beta, grid, std::move(symbol));
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Identity: return "identity";
      case Kind::Sobolev: return "sobolev(L=" + std::to_string(L) + ")";
      default: return "custom(beta=" + std::to_string(beta) + ")";
    }
  }

  /// |xi|^2 at a bin.
  static double xi2(const Grid& grid, Eigen::Index i, Eigen::Index j) {
    const double k0 = 2 * M_PI * double(wavenumber(i, grid.n));
    const double k1 = grid.dim == 2 ? 2 * M_PI * double(wavenumber(j, grid.n)) : 0.0;
    return k0 * k0 + k1 * k1;
  }

  /// Symbol evaluated in the requested precision.
  template <typename Scalar>
  GridFunction<Scalar> symbol_as() const {
    if (kind == Kind::Custom) return symbol.template cast<Scalar>();
    GridFunction<Scalar> out(grid.n, grid.cols());
    for (Eigen::Index j = 0; j < grid.cols(); ++j)
      for (Eigen::Index i = 0; i < grid.n; ++i) {
        if (kind == Kind::Identity) {
          out(i, j) = Scalar(1);
          continue;
        }
        const Scalar k0 = Scalar(2) * Scalar(M_PIl) * Scalar(wavenumber(i, grid.n));
        const Scalar k1 = grid.dim == 2 ? Scalar(2) * Scalar(M_PIl) * Scalar(wavenumber(j, grid.n)) : Scalar(0);
        out(i, j) = std::pow(Scalar(1) + k0 * k0 + k1 * k1, -Scalar(L));
      }
    return out;
  }

 private:
  static SmoothingOperator make(Kind kind, int L, double beta, const Grid& grid, GridFunction<double> custom) {
    grid.validate();
    SmoothingOperator op;
    op.kind = kind;
    op.L = L;
    op.beta = beta;
    op.grid = grid;
    op.symbol = std::move(custom);
    if (kind != Kind::Custom) op.symbol = op.symbol_as<double>();
    op.a1 = std::numeric_limits<double>::infinity();
    op.a2 = 0;
    op.C_T = 0;
    for (Eigen::Index j = 0; j < grid.cols(); ++j)
      for (Eigen::Index i = 0; i < grid.n; ++i) {
        const double m = std::abs(op.symbol(i, j));
        const double env = m * std::pow(1 + xi2(grid, i, j), beta / 2);
        op.a1 = std::min(op.a1, env);
        op.a2 = std::max(op.a2, env);
        op.C_T = std::max(op.C_T, m);
      }
    return op;
  }
};

/// T f by FFT: IFFT(symbol * FFT(f)).
template <typename Scalar>
GridFunction<Scalar> apply(const SmoothingOperator& op, const GridFunction<Scalar>& f) {
  op.grid.require(f, "apply");
  if (op.kind == SmoothingOperator::Kind::Identity) return f;
  ComplexGrid<Scalar> F = fft(f);
  F *= op.symbol_as<Scalar>().template cast<std::complex<Scalar>>();
  return ifft_real(std::move(F));
}

/// The single function psi with <T g, psi(. - k 2^{-J})> = <g, phi_{J,k,0}>:
/// FFT of the sampled scale-J father divided by the conjugate symbol.
template <typename Scalar = double>
GridFunction<Scalar> vaguelette(const SmoothingOperator& op, int M, int J, const Grid& grid) {
  if (grid != op.grid) throw std::invalid_argument("vaguelette: grid mismatch");
  auto phi = sample_father_wavelet<Scalar>(M, J, grid);
  if (op.kind == SmoothingOperator::Kind::Identity) return phi;
  const auto sym = op.symbol_as<Scalar>();
  for (Eigen::Index i = 0; i < sym.size(); ++i)
    if (!(std::abs(sym.data()[i]) > Scalar(0)))
      throw singular_operator("vaguelette: symbol of " + op.describe() + " vanishes at a grid frequency");
  ComplexGrid<Scalar> F = fft(phi);
  F /= sym.template cast<std::complex<Scalar>>();  // real symbol: conjugate is itself
  return ifft_real(std::move(F));
}

/// max_k |h^d sum_x (T phi_{J,0,0})(x) psi(x - k 2^{-J}) - delta_k|, computed in Scalar.
template <typename Scalar = long double>
Scalar biorthogonality_error(const SmoothingOperator& op, int M, int J, const Grid& grid) {
  auto phi = sample_father_wavelet<Scalar>(M, J, grid);
  auto psi = vaguelette<Scalar>(op, M, J, grid);
  auto corr = circular_correlate<Scalar>(apply(op, phi), psi);
  const Eigen::Index step = grid.n >> J, kc = grid.dim == 2 ? (Eigen::Index(1) << J) : 1;
  const Scalar cell = std::pow(Scalar(grid.n), -Scalar(grid.dim));
  Scalar worst(0);
  for (Eigen::Index k1 = 0; k1 < kc; ++k1)
    for (Eigen::Index k0 = 0; k0 < (Eigen::Index(1) << J); ++k0) {
      const Scalar v = cell * corr(k0 * step, k1 * step) - Scalar(k0 == 0 && k1 == 0 ? 1 : 0);
      worst = std::max(worst, std::abs(v));
    }
  return worst;
}

/// Quadrature Sobolev norm sqrt(sum_m |f^_m|^2 (1 + |2 pi m|^2)^t).
template <typename Scalar>
Scalar sobolev_norm(const Grid& grid, const GridFunction<Scalar>& f, double t) {
  grid.require(f, "sobolev_norm");
  const ComplexGrid<Scalar> F = fft(f);
  const Scalar scale = std::pow(Scalar(grid.n), -Scalar(grid.dim));
  Scalar acc(0);
  for (Eigen::Index j = 0; j < F.cols(); ++j)
    for (Eigen::Index i = 0; i < F.rows(); ++i)
      acc += std::norm(F(i, j) * scale) * Scalar(std::pow(1 + SmoothingOperator::xi2(grid, i, j), t));
  return std::sqrt(acc);
}

/// Discretized white noise: clean + sigma h^{-d/2} eps, eps iid N(0, 1).
template <typename Scalar>
GridFunction<Scalar> add_white_noise(const GridFunction<Scalar>& clean, double sigma, const Grid& grid,
                                     CounterRng& rng) {
  if (sigma < 0) throw std::invalid_argument("add_white_noise: sigma must be >= 0");
  grid.require(clean, "add_white_noise");
  if (sigma == 0) return clean;
  std::normal_distribution<double> normal;
  const double scale = sigma * std::pow(double(grid.n), grid.dim / 2.0);
  GridFunction<Scalar> out = clean;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += Scalar(scale * normal(rng));
  return out;
}

/// Level-decaying Gaussian prior on wavelet coefficients.
///
/// `d-2s` draws detail coefficients at level j with variance
/// L^2 2^{j(d-2s)}; `holder` uses L^2 2^{-j(d+2s)}, the decay whose sample
/// paths actually have Hölder smoothness about s. The single coarse
/// coefficient has variance L^2.
struct PriorParams {
  enum class Law { DMinus2s, Holder };

  double s = 1;
  double L = 1;
  int J_max = 6;
  int M = 10;
  Law law = Law::DMinus2s;

  void validate(const Grid& grid) const {
    if (!(s > 0)) throw std::invalid_argument("PriorParams: s must be > 0");
    if (!(L >= 0)) throw std::invalid_argument("PriorParams: L must be >= 0");
    if (J_max < 0 || J_max > grid.levels())
      throw std::invalid_argument("PriorParams: J_max must lie in [0, log2 n]");
    if (M < 1 || M > kMaxVanishingMoments) throw std::invalid_argument("PriorParams: M must be in 1..10");
  }

  double level_variance(int j, int d) const {
    const double e = law == Law::DMinus2s ? j * (d - 2 * s) : -j * (d + 2 * s);
    return L * L * std::exp2(e);
  }

  /// E ||f||^2 = L^2 + sum_j (2^d - 1) 2^{jd} Var_j (orthonormal synthesis).
  double second_moment(int d) const {
    double m = L * L;
    for (int j = 0; j < J_max; ++j) m += ((1 << d) - 1) * std::exp2(j * d) * level_variance(j, d);
    return m;
  }
};

inline std::string to_string(PriorParams::Law l) { return l == PriorParams::Law::DMinus2s ? "d-2s" : "holder"; }

inline PriorParams::Law prior_law_from_string(const std::string& s) {
  if (s == "d-2s") return PriorParams::Law::DMinus2s;
  if (s == "holder") return PriorParams::Law::Holder;
  throw std::invalid_argument("unknown prior law '" + s + "'");
}

/// Draws prior functions on a fixed grid; keeps the synthesis filters and the
/// sampled scale-J_max father so repeated draws are cheap.
class PriorSampler {
 public:
  PriorSampler(const PriorParams& p, const Grid& grid)
      : p_(p), grid_(grid), bank_(daubechies_filters<double>(p.M, grid.dim)) {
    p.validate(grid);
    phi_ = sample_father_wavelet<double>(p.M, p.J_max, grid);
  }

  const PriorParams& params() const { return p_; }
  const Grid& grid() const { return grid_; }

  WaveletCoefficients<double> draw_coefficients(CounterRng& rng) const {
    std::normal_distribution<double> normal;
    const int d = grid_.dim;
    WaveletCoefficients<double> c;
    c.depth = p_.J_max;
    c.boundary = Boundary::Periodic;
    c.coarse = Tensor::zeros(d, {0, 0}, {0, 0});
    c.coarse(0, 0) = p_.L * normal(rng);
    c.details.resize(static_cast<std::size_t>(p_.J_max));
    for (int j = 0; j < p_.J_max; ++j) {
      const Eigen::Index m = Eigen::Index(1) << j;
      const double sd = std::sqrt(p_.level_variance(j, d));
      for (int e = 0; e < bank_.detail_channels(); ++e) {
        auto t = Tensor::zeros(d, {0, 0}, {m - 1, d == 2 ? m - 1 : 0});
        for (Eigen::Index i = 0; i < t.values().size(); ++i) t.values().data()[i] = sd * normal(rng);
        c.details[static_cast<std::size_t>(j)].push_back(std::move(t));
      }
    }
    return c;
  }

  GridFunction<double> synthesize(const WaveletCoefficients<double>& c) const {
    return expand_on_grid(dwt_inverse(c, bank_), phi_, p_.J_max, grid_);
  }

  GridFunction<double> draw(CounterRng& rng) const { return synthesize(draw_coefficients(rng)); }

 private:
  PriorParams p_;
  Grid grid_;
  FilterBank<double> bank_;
  GridFunction<double> phi_;
};

inline GridFunction<double> sample_prior(const PriorParams& p, const Grid& grid, CounterRng& rng) {
  return PriorSampler(p, grid).draw(rng);
}

/// N noisy observations Y_i = T f_i + sigma dW_i of prior draws f_i.
struct TrainingSet {
  Grid grid;
  double sigma = 0;
  std::string op;
  std::uint64_t seed = 0;
  std::vector<GridFunction<double>> Y, f;

  std::size_t size() const { return f.size(); }
};

/// Pair i uses the sub-stream rng.derive(i) so the set does not depend on
/// evaluation order.
inline TrainingSet make_training_set(const SmoothingOperator& op, const PriorParams& prior, int N, double sigma,
                                     const Grid& grid, const CounterRng& rng, std::uint64_t seed = 0) {
  if (N < 1) throw std::invalid_argument("make_training_set: N must be >= 1");
  if (grid != op.grid) throw std::invalid_argument("make_training_set: operator grid mismatch");
  PriorSampler sampler(prior, grid);
  TrainingSet ts;
  ts.grid = grid;
  ts.sigma = sigma;
  ts.op = op.describe();
  ts.seed = seed;
  for (int i = 0; i < N; ++i) {
    CounterRng r = rng.derive(static_cast<std::uint64_t>(i));
    ts.f.push_back(sampler.draw(r));
    ts.Y.push_back(add_white_noise(apply(op, ts.f.back()), sigma, grid, r));
  }
  return ts;
}

}  // namespace sunet
