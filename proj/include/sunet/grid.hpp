#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace sunet {

/// Samples of a function on the periodic unit cube; n x 1 in 1-D, n x n in 2-D.
template <typename Scalar>
using GridFunction = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Equispaced periodic grid with n = 2^levels points per axis on [0, 1)^d.
struct Grid {
  int dim = 1;
  Eigen::Index n = 256;

  Grid() = default;
  Grid(int d, Eigen::Index points) : dim(d), n(points) { validate(); }

  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("Grid: n must be a power of two >= 2");
  }

  int levels() const {
    int l = 0;
    while ((Eigen::Index(1) << l) < n) ++l;
    return l;
  }

  double spacing() const { return 1.0 / static_cast<double>(n); }

  /// Quadrature weight h^d.
  double cell() const { return std::pow(spacing(), dim); }

  Eigen::Index cols() const { return dim == 2 ? n : 1; }
  Eigen::Index total() const { return n * cols(); }

  template <typename Scalar = double>
  GridFunction<Scalar> zeros() const {
    return GridFunction<Scalar>::Zero(n, cols());
  }

  template <typename Scalar>
  bool matches(const GridFunction<Scalar>& f) const {
    return f.rows() == n && f.cols() == cols();
  }

  template <typename Scalar>
  void require(const GridFunction<Scalar>& f, const char* who) const {
    if (!matches(f))
      throw std::invalid_argument(std::string(who) + ": grid mismatch (expected " + std::to_string(n) + "x" +
                                  std::to_string(cols()) + ", got " + std::to_string(f.rows()) + "x" +
                                  std::to_string(f.cols()) + ")");
  }

  bool operator==(const Grid& o) const { return dim == o.dim && n == o.n; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

/// Quadrature inner product h^d sum f g.
template <typename Scalar>
Scalar quad_dot(const Grid& grid, const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  return Scalar(grid.cell()) * (f * g).sum();
}

template <typename Scalar>
Scalar quad_norm(const Grid& grid, const GridFunction<Scalar>& f) {
  using std::sqrt;
  return sqrt(quad_dot(grid, f, f));
}

/// Circular shift: out(x) = f(x - shift * h) per axis.
template <typename Scalar>
GridFunction<Scalar> circular_shift(const GridFunction<Scalar>& f, Eigen::Index s0, Eigen::Index s1 = 0) {
  const Eigen::Index r = f.rows(), c = f.cols();
  GridFunction<Scalar> out(r, c);
  const Eigen::Index a = ((s0 % r) + r) % r, b = c > 1 ? ((s1 % c) + c) % c : 0;
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) out((i + a) % r, (j + b) % c) = f(i, j);
  return out;
}

}  // namespace sunet
