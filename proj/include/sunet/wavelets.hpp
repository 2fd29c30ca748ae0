#pragma once

#include "sunet/daubechies.hpp"
#include "sunet/grid.hpp"
#include "sunet/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sunet {

/// Output of a J-level transform: `details[j][e]` holds c_{j,k,e+1} for
/// j = 0 (coarsest) .. J-1, `coarse` holds c_{0,k,0}.
template <typename Scalar>
struct WaveletCoefficients {
  int depth = 0;
  Boundary boundary = Boundary::Periodic;
  DTensor<Scalar> coarse;
  std::vector<std::vector<DTensor<Scalar>>> details;
};

namespace detail {

// One analysis step of the recursion c_{j-1,k} = sum_l f[l - 2k] c_{j,l}.
template <typename Scalar>
DTensor<Scalar> analysis_step(const DTensor<Scalar>& f, const DTensor<Scalar>& c, Boundary boundary) {
  using Index = Eigen::Index;
  const int d = c.dim();
  const bool periodic = boundary == Boundary::Periodic;
  typename DTensor<Scalar>::Bounds lo{0, 0}, hi{0, 0};
  for (int ax = 0; ax < d; ++ax) {
    if (periodic) {
      hi[ax] = c.extent(ax) / 2 - 1;
    } else {
      lo[ax] = ceil_div(c.lo(ax) - f.hi(ax), 2);
      hi[ax] = floor_div(c.hi(ax) - f.lo(ax), 2);
    }
  }
  auto out = DTensor<Scalar>::zeros(d, lo, hi);
  for (Index k1 = lo[1]; k1 <= hi[1]; ++k1)
    for (Index k0 = lo[0]; k0 <= hi[0]; ++k0) {
      Scalar acc(0);
      for (Index t1 = f.lo(1); t1 <= f.hi(1); ++t1)
        for (Index t0 = f.lo(0); t0 <= f.hi(0); ++t0) {
          Index l0 = t0 + 2 * k0, l1 = d == 2 ? t1 + 2 * k1 : 0;
          if (periodic) {
            l0 = wrap(l0, c.extent(0));
            if (d == 2) l1 = wrap(l1, c.extent(1));
          } else if (!c.defined(l0, l1)) {
            continue;
          }
          acc += f(t0, t1) * c(l0, l1);
        }
      out(k0, k1) = acc;
    }
  return out;
}

// One synthesis step: out_k += sum_r f[r] x_{(k-r)/2}, i.e. scatter x_m into k = 2m + r.
template <typename Scalar>
void synthesis_scatter(const DTensor<Scalar>& f, const DTensor<Scalar>& x, DTensor<Scalar>& out,
                       Boundary boundary) {
  using Index = Eigen::Index;
  const int d = x.dim();
  const bool periodic = boundary == Boundary::Periodic;
  for (Index m1 = x.lo(1); m1 <= x.hi(1); ++m1)
    for (Index m0 = x.lo(0); m0 <= x.hi(0); ++m0) {
      const Scalar v = x(m0, m1);
      for (Index r1 = f.lo(1); r1 <= f.hi(1); ++r1)
        for (Index r0 = f.lo(0); r0 <= f.hi(0); ++r0) {
          Index k0 = 2 * m0 + r0, k1 = d == 2 ? 2 * m1 + r1 : 0;
          if (periodic) {
            k0 = wrap(k0, out.extent(0));
            if (d == 2) k1 = wrap(k1, out.extent(1));
          }
          out(k0, k1) += f(r0, r1) * v;
        }
    }
}

}  // namespace detail

/// Recursive forward transform of the finest-scale coefficients s_J.
template <typename Scalar>
WaveletCoefficients<Scalar> dwt_forward(const DTensor<Scalar>& s_J, const FilterBank<Scalar>& bank, int levels,
                                        Boundary boundary = Boundary::Periodic) {
  if (s_J.dim() != bank.dim) throw std::invalid_argument("dwt_forward: dimension mismatch");
  if (levels < 0) throw std::invalid_argument("dwt_forward: negative level count");
  for (int ax = 0; ax < s_J.dim(); ++ax) {
    const Eigen::Index need = Eigen::Index(1) << levels;
    if (s_J.extent(ax) < need || (boundary == Boundary::Periodic && s_J.extent(ax) % need != 0))
      throw std::invalid_argument("dwt_forward: input extent " + std::to_string(s_J.extent(ax)) +
                                  " too small for " + std::to_string(levels) + " levels");
    if (boundary == Boundary::Periodic && s_J.lo(ax) != 0)
      throw std::invalid_argument("dwt_forward: periodic mode needs zero-based input");
  }
  WaveletCoefficients<Scalar> out;
  out.depth = levels;
  out.boundary = boundary;
  out.details.resize(static_cast<std::size_t>(levels));
  DTensor<Scalar> s = s_J;
  for (int j = levels - 1; j >= 0; --j) {
    auto& level = out.details[static_cast<std::size_t>(j)];
    for (const auto& g : bank.g) level.push_back(detail::analysis_step(g, s, boundary));
    s = detail::analysis_step(bank.h, s, boundary);
  }
  out.coarse = std::move(s);
  return out;
}

/// Inverse of dwt_forward. In paper mode the result covers every index that
/// receives a contribution; entries outside the original range are zero up
/// to rounding.
template <typename Scalar>
DTensor<Scalar> dwt_inverse(const WaveletCoefficients<Scalar>& coeffs, const FilterBank<Scalar>& bank) {
  using Index = Eigen::Index;
  if (static_cast<int>(coeffs.details.size()) != coeffs.depth)
    throw std::invalid_argument("dwt_inverse: detail level count does not match depth");
  const int d = bank.dim;
  if (coeffs.coarse.dim() != d) throw std::invalid_argument("dwt_inverse: dimension mismatch");
  const bool periodic = coeffs.boundary == Boundary::Periodic;
  DTensor<Scalar> s = coeffs.coarse;
  for (int j = 0; j < coeffs.depth; ++j) {
    const auto& level = coeffs.details[static_cast<std::size_t>(j)];
    if (static_cast<int>(level.size()) != bank.detail_channels())
      throw std::invalid_argument("dwt_inverse: level " + std::to_string(j) + " has wrong channel count");
    typename DTensor<Scalar>::Bounds lo{0, 0}, hi{0, 0};
    if (periodic) {
      for (const auto& t : level)
        if (!t.same_shape(s))
          throw std::invalid_argument("dwt_inverse: level " + std::to_string(j) + " size mismatch");
      for (int ax = 0; ax < d; ++ax) hi[ax] = 2 * s.extent(ax) - 1;
    } else {
      for (int ax = 0; ax < d; ++ax) {
        Index a = 2 * s.lo(ax) + bank.h.lo(ax), b = 2 * s.hi(ax) + bank.h.hi(ax);
        for (std::size_t e = 0; e < level.size(); ++e) {
          if (level[e].dim() != d) throw std::invalid_argument("dwt_inverse: dimension mismatch");
          a = std::min(a, 2 * level[e].lo(ax) + bank.g[e].lo(ax));
          b = std::max(b, 2 * level[e].hi(ax) + bank.g[e].hi(ax));
        }
        lo[ax] = a;
        hi[ax] = b;
      }
    }
    auto next = DTensor<Scalar>::zeros(d, lo, hi);
    detail::synthesis_scatter(bank.h, s, next, coeffs.boundary);
    for (std::size_t e = 0; e < level.size(); ++e) detail::synthesis_scatter(bank.g[e], level[e], next, coeffs.boundary);
    s = std::move(next);
  }
  return s;
}

/// Soft thresholding written as the paired-ReLU max{x - tau, 0} - max{-x - tau, 0}.
template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar tau) {
  using std::max;
  return max(x - tau, Scalar(0)) - max(-x - tau, Scalar(0));
}

template <typename Scalar>
DTensor<Scalar> soft_threshold(const DTensor<Scalar>& t, Scalar tau) {
  DTensor<Scalar> out = t;
  out.values() = t.values().unaryExpr([tau](Scalar x) { return soft_threshold(x, tau); });
  return out;
}

/// Direct wavelet soft-thresholding: forward transform, shrink every detail
/// coefficient of level j by taus[j] (coarse untouched), inverse transform.
template <typename Scalar>
DTensor<Scalar> wavelet_threshold_oracle(const DTensor<Scalar>& s_J, const FilterBank<Scalar>& bank,
                                         const std::vector<Scalar>& taus, Boundary boundary = Boundary::Periodic) {
  for (Scalar t : taus)
    if (!(t >= Scalar(0))) throw std::invalid_argument("wavelet_threshold_oracle: thresholds must be >= 0");
  auto coeffs = dwt_forward(s_J, bank, static_cast<int>(taus.size()), boundary);
  for (std::size_t j = 0; j < taus.size(); ++j)
    for (auto& t : coeffs.details[j]) t = soft_threshold(t, taus[j]);
  return dwt_inverse(coeffs, bank);
}

/// Samples of the scale-J father 2^{Jd/2} phi(2^J x) on the periodic grid.
///
/// Values come from the cascade iteration refined four dyadic levels past
/// the grid spacing, then subsampled; translates wrap around the torus.
template <typename Scalar = double>
GridFunction<Scalar> sample_father_wavelet(int M, int J, const Grid& grid) {
  grid.validate();
  if (J < 0) throw std::invalid_argument("sample_father_wavelet: negative scale");
  const Eigen::Index per_unit = grid.n >> std::min(J, grid.levels());
  if ((Eigen::Index(1) << J) > grid.n)
    throw std::invalid_argument("sample_father_wavelet: grid with " + std::to_string(grid.n) +
                                " points too coarse for scale " + std::to_string(J));
  constexpr int kExtraLevels = 4;
  int P = kExtraLevels;
  for (Eigen::Index r = per_unit; r > 1; r >>= 1) ++P;

  const auto bank = daubechies_filters<Scalar>(M, 1);
  const Eigen::Index taps = bank.h.size();
  const Scalar root2 = std::sqrt(Scalar(2));
  std::vector<Scalar> v{Scalar(1)};
  for (int p = 0; p < P; ++p) {
    std::vector<Scalar> next(2 * v.size() - 1 + static_cast<std::size_t>(taps) - 1, Scalar(0));
    for (std::size_t m = 0; m < v.size(); ++m)
      for (Eigen::Index r = 0; r < taps; ++r) next[2 * m + static_cast<std::size_t>(r)] += root2 * bank.h(r) * v[m];
    v = std::move(next);
  }

  const std::size_t stride = std::size_t(1) << kExtraLevels;
  const Scalar scale = std::pow(Scalar(2), Scalar(J) / 2);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> line = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(grid.n);
  for (std::size_t i = 0; i * stride < v.size(); ++i)
    line(static_cast<Eigen::Index>(i % static_cast<std::size_t>(grid.n))) += scale * v[i * stride];
  if (grid.dim == 1) return line;
  return (line.matrix() * line.matrix().transpose()).array();
}

/// Grid evaluation of sum_k c_k phi(x - k 2^{-J}) with periodic translates;
/// indices of `coeffs` outside [0, 2^J) wrap around.
template <typename Scalar>
GridFunction<Scalar> expand_on_grid(const DTensor<Scalar>& coeffs, const GridFunction<Scalar>& phi, int J,
                                    const Grid& grid) {
  using Index = Eigen::Index;
  grid.require(phi, "expand_on_grid");
  const Index step = grid.n >> J;
  std::vector<std::pair<Index, Index>> support;
  for (Index j = 0; j < phi.cols(); ++j)
    for (Index i = 0; i < phi.rows(); ++i)
      if (phi(i, j) != Scalar(0)) support.emplace_back(i, j);
  GridFunction<Scalar> out = grid.zeros<Scalar>();
  const Index n = grid.n, c = grid.cols();
  for (Index k1 = coeffs.lo(1); k1 <= coeffs.hi(1); ++k1)
    for (Index k0 = coeffs.lo(0); k0 <= coeffs.hi(0); ++k0) {
      const Scalar v = coeffs(k0, k1);
      if (v == Scalar(0)) continue;
      const Index o0 = detail::wrap(k0 * step, n), o1 = c > 1 ? detail::wrap(k1 * step, n) : 0;
      for (const auto& [i, j] : support) out((i + o0) % n, c > 1 ? (j + o1) % n : 0) += v * phi(i, j);
    }
  return out;
}

/// Adjoint of expand_on_grid: out_k = h^d sum_x r(x) phi(x - k 2^{-J}) over
/// the index range of `shape`.
template <typename Scalar>
DTensor<Scalar> project_on_translates(const GridFunction<Scalar>& r, const GridFunction<Scalar>& phi, int J,
                                      const Grid& grid, const DTensor<Scalar>& shape) {
  using Index = Eigen::Index;
  grid.require(phi, "project_on_translates");
  grid.require(r, "project_on_translates");
  const Index step = grid.n >> J;
  std::vector<std::pair<Index, Index>> support;
  for (Index j = 0; j < phi.cols(); ++j)
    for (Index i = 0; i < phi.rows(); ++i)
      if (phi(i, j) != Scalar(0)) support.emplace_back(i, j);
  auto out = DTensor<Scalar>::zeros(shape.dim(), shape.lo(), shape.hi());
  const Index n = grid.n, c = grid.cols();
  const Scalar cell(grid.cell());
  for (Index k1 = out.lo(1); k1 <= out.hi(1); ++k1)
    for (Index k0 = out.lo(0); k0 <= out.hi(0); ++k0) {
      const Index o0 = detail::wrap(k0 * step, n), o1 = c > 1 ? detail::wrap(k1 * step, n) : 0;
      Scalar acc(0);
      for (const auto& [i, j] : support) acc += r((i + o0) % n, c > 1 ? (j + o1) % n : 0) * phi(i, j);
      out(k0, k1) = cell * acc;
    }
  return out;
}

}  // namespace sunet
