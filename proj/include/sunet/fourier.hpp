#pragma once

#include "sunet/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

namespace sunet {

template <typename Scalar>
using ComplexGrid = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Signed integer wavenumber of DFT bin i on an n-point axis, in [-n/2, n/2).
inline Eigen::Index wavenumber(Eigen::Index i, Eigen::Index n) { return i < n / 2 ? i : i - n; }

namespace detail {

template <typename Scalar>
void fft_axes(ComplexGrid<Scalar>& a, bool inverse) {
  Eigen::FFT<Scalar> fft;
  using C = std::complex<Scalar>;
  std::vector<C> in, out;
  in.resize(static_cast<std::size_t>(a.rows()));
  out.resize(in.size());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) in[i] = a(i, j);
    if (inverse)
      fft.inv(out.data(), in.data(), a.rows());
    else
      fft.fwd(out.data(), in.data(), a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = out[i];
  }
  if (a.cols() == 1) return;
  in.resize(static_cast<std::size_t>(a.cols()));
  out.resize(in.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) in[j] = a(i, j);
    if (inverse)
      fft.inv(out.data(), in.data(), a.cols());
    else
      fft.fwd(out.data(), in.data(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = out[j];
  }
}

}  // namespace detail

/// Unnormalized forward DFT over every axis.
template <typename Scalar>
ComplexGrid<Scalar> fft(const GridFunction<Scalar>& f) {
  ComplexGrid<Scalar> a = f.template cast<std::complex<Scalar>>();
  detail::fft_axes(a, false);
  return a;
}

/// Inverse DFT (with 1/n per axis), real part.
template <typename Scalar>
GridFunction<Scalar> ifft_real(ComplexGrid<Scalar> a) {
  detail::fft_axes(a, true);
  return a.real();
}

/// out(s) = sum_x f(x) g(x - s), all indices periodic.
template <typename Scalar>
GridFunction<Scalar> circular_correlate(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  ComplexGrid<Scalar> F = fft(f);
  F *= fft(g).conjugate();
  return ifft_real(std::move(F));
}

/// out(x) = sum_y f(y) g(x - y), all indices periodic.
template <typename Scalar>
GridFunction<Scalar> circular_convolve(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  ComplexGrid<Scalar> F = fft(f);
  F *= fft(g);
  return ifft_real(std::move(F));
}

}  // namespace sunet
