#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sunet {

/// How undefined indices are treated by the tensor convolutions.
///
/// `Paper` drops every term whose index falls outside a tensor's range
/// (zero extension); outputs grow by the filter overhang. `Periodic` wraps
/// indices modulo the input extent; it requires inputs indexed from zero and
/// keeps the 2:1 size relation exact.
enum class Boundary { Paper, Periodic };

inline std::string to_string(Boundary b) { return b == Boundary::Paper ? "paper" : "periodic"; }

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "paper") return Boundary::Paper;
  if (s == "periodic") return Boundary::Periodic;
  throw std::invalid_argument("unknown boundary mode '" + s + "'");
}

namespace detail {

inline Eigen::Index floor_div(Eigen::Index a, Eigen::Index b) {
  Eigen::Index q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Eigen::Index ceil_div(Eigen::Index a, Eigen::Index b) { return -floor_div(-a, b); }

inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  Eigen::Index r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace detail

/// A one- or two-dimensional array of reals carrying explicit per-axis index
/// bounds [lo, hi]. One-dimensional tensors store an extent x 1 array and
/// keep axis 1 fixed at [0, 0].
template <typename Scalar>
class DTensor {
 public:
  using Index = Eigen::Index;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Bounds = std::array<Index, 2>;

  DTensor() : values_(Array::Zero(1, 1)) {}

  static DTensor zeros(int dim, Bounds lo, Bounds hi) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("DTensor: dim must be 1 or 2");
    if (dim == 1) lo[1] = hi[1] = 0;
    if (hi[0] < lo[0] || hi[1] < lo[1]) throw std::invalid_argument("DTensor: hi < lo");
    DTensor t;
    t.dim_ = dim;
    t.lo_ = lo;
    t.values_ = Array::Zero(hi[0] - lo[0] + 1, hi[1] - lo[1] + 1);
    return t;
  }

  static DTensor zeros1(Index lo, Index hi) { return zeros(1, {lo, 0}, {hi, 0}); }

  static DTensor zeros2(Bounds lo, Bounds hi) { return zeros(2, lo, hi); }

  /// Wraps `values` as a tensor whose first entry sits at index `lo`.
  static DTensor from_array(int dim, Bounds lo, Array values) {
    if (dim == 1 && values.cols() != 1) throw std::invalid_argument("DTensor: 1-D values must be a column");
    if (values.size() == 0) throw std::invalid_argument("DTensor: empty values");
    DTensor t;
    t.dim_ = dim;
    t.lo_ = lo;
    if (dim == 1) t.lo_[1] = 0;
    t.values_ = std::move(values);
    return t;
  }

  static DTensor from_vector(Index lo, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
    return from_array(1, {lo, 0}, v.array());
  }

  int dim() const { return dim_; }
  Index lo(int axis) const { return lo_[axis]; }
  Index hi(int axis) const { return lo_[axis] + extent(axis) - 1; }
  Index extent(int axis) const { return axis == 0 ? values_.rows() : values_.cols(); }
  Bounds lo() const { return lo_; }
  Bounds hi() const { return {hi(0), hi(1)}; }
  Index size() const { return values_.size(); }

  bool defined(Index i, Index j = 0) const {
    return i >= lo_[0] && i <= hi(0) && j >= lo_[1] && j <= hi(1);
  }

  Scalar& operator()(Index i, Index j = 0) { return values_(i - lo_[0], j - lo_[1]); }
  Scalar operator()(Index i, Index j = 0) const { return values_(i - lo_[0], j - lo_[1]); }

  /// Value at (i, j), or zero when undefined.
  Scalar get(Index i, Index j = 0) const { return defined(i, j) ? (*this)(i, j) : Scalar(0); }

  const Array& values() const { return values_; }
  Array& values() { return values_; }

  bool same_shape(const DTensor& o) const {
    return dim_ == o.dim_ && lo_ == o.lo_ && values_.rows() == o.values_.rows() &&
           values_.cols() == o.values_.cols();
  }

  /// Copy of this tensor re-indexed onto the range of `shape`; entries
  /// outside this tensor's range become zero, entries outside `shape` drop.
  DTensor restricted_to(const DTensor& shape) const {
    DTensor out = zeros(shape.dim_, shape.lo(), shape.hi());
    const Index i0 = std::max(lo_[0], shape.lo_[0]), i1 = std::min(hi(0), shape.hi(0));
    const Index j0 = std::max(lo_[1], shape.lo_[1]), j1 = std::min(hi(1), shape.hi(1));
    if (i0 > i1 || j0 > j1) return out;
    out.values_.block(i0 - shape.lo_[0], j0 - shape.lo_[1], i1 - i0 + 1, j1 - j0 + 1) =
        values_.block(i0 - lo_[0], j0 - lo_[1], i1 - i0 + 1, j1 - j0 + 1);
    return out;
  }

  template <typename Other>
  DTensor<Other> cast() const {
    return DTensor<Other>::from_array(dim_, lo_, values_.template cast<Other>());
  }

 private:
  int dim_ = 1;
  Bounds lo_{0, 0};
  Array values_;
};

using Tensor = DTensor<double>;

namespace detail {

template <typename Scalar>
void check_dims(const DTensor<Scalar>& gamma, const DTensor<Scalar>& a, const char* op) {
  if (gamma.dim() != a.dim())
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" + std::to_string(gamma.dim()) +
                                " vs " + std::to_string(a.dim()) + ")");
}

template <typename Scalar>
void check_periodic(const DTensor<Scalar>& a, const char* op) {
  for (int ax = 0; ax < a.dim(); ++ax)
    if (a.lo(ax) != 0) throw std::invalid_argument(std::string(op) + ": periodic mode needs zero-based input");
}

}  // namespace detail

/// Downsampled convolution: out(k) = sum_l gamma_l a_{2k-l}.
///
/// In paper mode the output range is exactly the set of k with at least one
/// defined term. In periodic mode a has extent n (even) per axis and the
/// output has extent n/2.
template <typename Scalar>
DTensor<Scalar> down_conv(const DTensor<Scalar>& gamma, const DTensor<Scalar>& a,
                          Boundary boundary = Boundary::Paper) {
  using Index = Eigen::Index;
  detail::check_dims(gamma, a, "down_conv");
  const int d = a.dim();
  typename DTensor<Scalar>::Bounds lo{0, 0}, hi{0, 0};
  if (boundary == Boundary::Periodic) {
    detail::check_periodic(a, "down_conv");
    for (int ax = 0; ax < d; ++ax) {
      if (a.extent(ax) % 2 != 0) throw std::invalid_argument("down_conv: periodic input extent must be even");
      hi[ax] = a.extent(ax) / 2 - 1;
    }
    auto out = DTensor<Scalar>::zeros(d, lo, hi);
    const Index n0 = a.extent(0), n1 = a.extent(1);
    for (Index k1 = 0; k1 <= hi[1]; ++k1)
      for (Index k0 = 0; k0 <= hi[0]; ++k0) {
        Scalar acc(0);
        for (Index l1 = gamma.lo(1); l1 <= gamma.hi(1); ++l1) {
          const Index m1 = d == 2 ? detail::wrap(2 * k1 - l1, n1) : 0;
          for (Index l0 = gamma.lo(0); l0 <= gamma.hi(0); ++l0)
            acc += gamma(l0, l1) * a(detail::wrap(2 * k0 - l0, n0), m1);
        }
        out(k0, k1) = acc;
      }
    return out;
  }

  for (int ax = 0; ax < d; ++ax) {
    lo[ax] = detail::ceil_div(a.lo(ax) + gamma.lo(ax), 2);
    hi[ax] = detail::floor_div(a.hi(ax) + gamma.hi(ax), 2);
  }
  auto out = DTensor<Scalar>::zeros(d, lo, hi);
  for (Index k1 = lo[1]; k1 <= hi[1]; ++k1)
    for (Index k0 = lo[0]; k0 <= hi[0]; ++k0) {
      Scalar acc(0);
      // l range such that 2k - l lies in [a.lo, a.hi].
      const Index l0a = std::max(gamma.lo(0), 2 * k0 - a.hi(0)), l0b = std::min(gamma.hi(0), 2 * k0 - a.lo(0));
      const Index l1a = d == 2 ? std::max(gamma.lo(1), 2 * k1 - a.hi(1)) : 0;
      const Index l1b = d == 2 ? std::min(gamma.hi(1), 2 * k1 - a.lo(1)) : 0;
      for (Index l1 = l1a; l1 <= l1b; ++l1)
        for (Index l0 = l0a; l0 <= l0b; ++l0)
          acc += gamma(l0, l1) * a(2 * k0 - l0, d == 2 ? 2 * k1 - l1 : 0);
      out(k0, k1) = acc;
    }
  return out;
}

/// Upsampled convolution: out(k) = sum_l gamma_l a_{(k+l)/2}, restricted to
/// l with k + l even on every axis. Empty sums give zero.
template <typename Scalar>
DTensor<Scalar> up_conv(const DTensor<Scalar>& gamma, const DTensor<Scalar>& a,
                        Boundary boundary = Boundary::Paper) {
  using Index = Eigen::Index;
  detail::check_dims(gamma, a, "up_conv");
  const int d = a.dim();
  typename DTensor<Scalar>::Bounds lo{0, 0}, hi{0, 0};
  if (boundary == Boundary::Periodic) {
    detail::check_periodic(a, "up_conv");
    for (int ax = 0; ax < d; ++ax) hi[ax] = 2 * a.extent(ax) - 1;
    auto out = DTensor<Scalar>::zeros(d, lo, hi);
    const Index m0 = a.extent(0), m1 = a.extent(1);
    // Scatter form: every (m, l) pair contributes to k = 2m - l.
    const Index n0 = 2 * m0, n1 = d == 2 ? 2 * m1 : 1;
    for (Index i1 = 0; i1 < m1; ++i1)
      for (Index i0 = 0; i0 < m0; ++i0) {
        const Scalar v = a(i0, i1);
        if (v == Scalar(0)) continue;
        for (Index l1 = gamma.lo(1); l1 <= gamma.hi(1); ++l1) {
          const Index k1 = d == 2 ? detail::wrap(2 * i1 - l1, n1) : 0;
          for (Index l0 = gamma.lo(0); l0 <= gamma.hi(0); ++l0)
            out(detail::wrap(2 * i0 - l0, n0), k1) += gamma(l0, l1) * v;
        }
      }
    return out;
  }

  for (int ax = 0; ax < d; ++ax) {
    lo[ax] = 2 * a.lo(ax) - gamma.hi(ax);
    hi[ax] = 2 * a.hi(ax) - gamma.lo(ax);
  }
  auto out = DTensor<Scalar>::zeros(d, lo, hi);
  for (Index i1 = a.lo(1); i1 <= a.hi(1); ++i1)
    for (Index i0 = a.lo(0); i0 <= a.hi(0); ++i0) {
      const Scalar v = a(i0, i1);
      if (v == Scalar(0)) continue;
      for (Index l1 = gamma.lo(1); l1 <= gamma.hi(1); ++l1)
        for (Index l0 = gamma.lo(0); l0 <= gamma.hi(0); ++l0)
          out(2 * i0 - l0, d == 2 ? 2 * i1 - l1 : 0) += gamma(l0, l1) * v;
    }
  return out;
}

/// Filter gradient of a downsampled convolution: for every l in the range
/// of `gamma_shape`, sum_k g_k a_{2k-l}, where g is the gradient with
/// respect to the output of down_conv(gamma, a).
template <typename Scalar>
DTensor<Scalar> down_conv_filter_grad(const DTensor<Scalar>& g, const DTensor<Scalar>& a,
                                      const DTensor<Scalar>& gamma_shape, Boundary boundary) {
  using Index = Eigen::Index;
  const int d = a.dim();
  auto out = DTensor<Scalar>::zeros(d, gamma_shape.lo(), gamma_shape.hi());
  const bool periodic = boundary == Boundary::Periodic;
  for (Index l1 = out.lo(1); l1 <= out.hi(1); ++l1)
    for (Index l0 = out.lo(0); l0 <= out.hi(0); ++l0) {
      Scalar acc(0);
      for (Index k1 = g.lo(1); k1 <= g.hi(1); ++k1)
        for (Index k0 = g.lo(0); k0 <= g.hi(0); ++k0) {
          Index m0 = 2 * k0 - l0, m1 = d == 2 ? 2 * k1 - l1 : 0;
          if (periodic) {
            m0 = detail::wrap(m0, a.extent(0));
            if (d == 2) m1 = detail::wrap(m1, a.extent(1));
          } else if (!a.defined(m0, m1)) {
            continue;
          }
          acc += g(k0, k1) * a(m0, m1);
        }
      out(l0, l1) = acc;
    }
  return out;
}

/// Filter gradient of an upsampled convolution: for every l, sum_m a_m g_{2m-l}.
template <typename Scalar>
DTensor<Scalar> up_conv_filter_grad(const DTensor<Scalar>& g, const DTensor<Scalar>& a,
                                    const DTensor<Scalar>& gamma_shape, Boundary boundary) {
  using Index = Eigen::Index;
  const int d = a.dim();
  auto out = DTensor<Scalar>::zeros(d, gamma_shape.lo(), gamma_shape.hi());
  const bool periodic = boundary == Boundary::Periodic;
  for (Index l1 = out.lo(1); l1 <= out.hi(1); ++l1)
    for (Index l0 = out.lo(0); l0 <= out.hi(0); ++l0) {
      Scalar acc(0);
      for (Index m1 = a.lo(1); m1 <= a.hi(1); ++m1)
        for (Index m0 = a.lo(0); m0 <= a.hi(0); ++m0) {
          Index k0 = 2 * m0 - l0, k1 = d == 2 ? 2 * m1 - l1 : 0;
          if (periodic) {
            k0 = detail::wrap(k0, g.extent(0));
            if (d == 2) k1 = detail::wrap(k1, g.extent(1));
          } else if (!g.defined(k0, k1)) {
            continue;
          }
          acc += a(m0, m1) * g(k0, k1);
        }
      out(l0, l1) = acc;
    }
  return out;
}

/// Outer product of two 1-D tensors: out(i, j) = u_i v_j.
template <typename Scalar>
DTensor<Scalar> tensor_product(const DTensor<Scalar>& u, const DTensor<Scalar>& v) {
  if (u.dim() != 1 || v.dim() != 1) throw std::invalid_argument("tensor_product: inputs must be 1-D");
  typename DTensor<Scalar>::Array vals = u.values().col(0).matrix() * v.values().col(0).matrix().transpose();
  return DTensor<Scalar>::from_array(2, {u.lo(0), v.lo(0)}, std::move(vals));
}

template <typename Scalar>
Scalar l2_norm(const DTensor<Scalar>& a) {
  return a.values().matrix().norm();
}

/// Sum over the union of both index ranges.
template <typename Scalar>
DTensor<Scalar> add(const DTensor<Scalar>& x, const DTensor<Scalar>& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("add: dimension mismatch");
  if (x.same_shape(y)) return DTensor<Scalar>::from_array(x.dim(), x.lo(), x.values() + y.values());
  typename DTensor<Scalar>::Bounds lo{std::min(x.lo(0), y.lo(0)), std::min(x.lo(1), y.lo(1))};
  typename DTensor<Scalar>::Bounds hi{std::max(x.hi(0), y.hi(0)), std::max(x.hi(1), y.hi(1))};
  auto out = DTensor<Scalar>::zeros(x.dim(), lo, hi);
  out.values().block(x.lo(0) - lo[0], x.lo(1) - lo[1], x.extent(0), x.extent(1)) += x.values();
  out.values().block(y.lo(0) - lo[0], y.lo(1) - lo[1], y.extent(0), y.extent(1)) += y.values();
  return out;
}

}  // namespace sunet
