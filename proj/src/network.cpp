#include "sunet/network.hpp"

#include "sunet/daubechies.hpp"
#include "sunet/fourier.hpp"
#include "sunet/wavelets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sunet {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

Tensor reversed(const Tensor& h) {
  auto out = Tensor::zeros(h.dim(), {-h.hi(0), -h.hi(1)}, {-h.lo(0), -h.lo(1)});
  for (Eigen::Index j = h.lo(1); j <= h.hi(1); ++j)
    for (Eigen::Index i = h.lo(0); i <= h.hi(0); ++i) out(-i, -j) = h(i, j);
  return out;
}

Eigen::Index support_size(const Tensor& t) { return (t.values() != 0.0).count(); }

template <typename F>
void for_each_filter(SUNet& net, F&& f) {
  for (auto& t : net.alpha) f(t);
  for (auto& t : net.a) f(t);
  for (auto& lv : net.beta)
    for (auto& t : lv) f(t);
  for (auto& lv : net.b)
    for (auto& t : lv) f(t);
}

template <typename F>
void for_each_filter(const SUNet& net, F&& f) {
  for_each_filter(const_cast<SUNet&>(net), [&](Tensor& t) { f(static_cast<const Tensor&>(t)); });
}

// Nearest point (quadrature L2) of the ellipsoid sobolev_norm(., r) <= C:
// Fourier coefficients c_m / (1 + lambda w_m), w_m = (1 + |xi_m|^2)^r, with
// lambda found by bisection on a log scale.
GridFunction<double> sobolev_ball_projection(const Grid& grid, const GridFunction<double>& psi, double r, double C) {
  ComplexGrid<double> F = fft(psi);
  GridFunction<double> w(F.rows(), F.cols()), c2(F.rows(), F.cols());
  const double scale = std::pow(double(grid.n), -double(grid.dim));
  for (Eigen::Index j = 0; j < F.cols(); ++j)
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
      w(i, j) = std::pow(1 + SmoothingOperator::xi2(grid, i, j), r);
      c2(i, j) = std::norm(F(i, j) * scale);
    }
  auto norm2 = [&](double lambda) { return (w * c2 / (1 + lambda * w).square()).sum(); };
  const double target = C * C;
  double lo = 0, hi = 1e-30;
  while (norm2(hi) > target) hi *= 4;
  for (int it = 0; it < 200; ++it) {
    const double mid = lo == 0 ? hi / 2 : std::sqrt(lo * hi);
    (norm2(mid) > target ? lo : hi) = mid;
  }
  F /= (1 + hi * w).cast<std::complex<double>>();
  return ifft_real(std::move(F));
}

std::string level_name(const char* what, int j) { return std::string(what) + " at level " + std::to_string(j); }

ForwardTrace run(const SUNet& net, Tensor s_J, ForwardTrace tr) {
  const int J = net.J;
  const Boundary bd = net.boundary;
  tr.s.assign(static_cast<std::size_t>(J) + 1, Tensor());
  tr.sbar.assign(static_cast<std::size_t>(J) + 1, Tensor());
  tr.d.assign(static_cast<std::size_t>(J), {});
  tr.dbar.assign(static_cast<std::size_t>(J), {});
  tr.s[J] = std::move(s_J);
  for (int j = J - 1; j >= 0; --j) {
    try {
      tr.s[j] = down_conv(net.alpha[j], tr.s[j + 1], bd);
      for (int e = 0; e < net.channels(); ++e) {
        tr.d[j].push_back(down_conv(net.beta[j][e], tr.s[j + 1], bd));
        tr.dbar[j].push_back(soft_threshold(tr.d[j].back(), net.tau[j]));
      }
    } catch (const std::invalid_argument& ex) {
      throw std::logic_error(level_name("forward: contracting path inconsistent", j) + ": " + ex.what());
    }
  }
  tr.sbar[0] = tr.s[0];
  for (int j = 0; j < J; ++j) {
    try {
      Tensor x = up_conv(net.a[j], tr.sbar[j], bd);
      for (int e = 0; e < net.channels(); ++e) {
        Tensor y = up_conv(net.b[j][e], tr.dbar[j][e], bd);
        if (bd == Boundary::Periodic && !y.same_shape(x))
          throw std::invalid_argument("detail branch shape differs from coarse branch");
        x = add(x, y);
      }
      tr.sbar[j + 1] = std::move(x);
    } catch (const std::invalid_argument& ex) {
      throw std::logic_error(level_name("forward: expanding path inconsistent", j + 1) + ": " + ex.what());
    }
  }
  tr.output = expand_on_grid(tr.sbar[J], net.phi, J, net.grid);
  return tr;
}

}  // namespace

void NetClassParams::validate(int d) const {
  if (r < 1 || R < 1 || S_filter < 1) bad("NetClassParams: r, R and S_filter must be positive");
  if (!(kappa_tau > 0) || !(C_psi_L2 > 0) || !(C_psi_Hr > 0)) bad("NetClassParams: caps must be positive");
  if (!(r > d / 2.0)) bad("NetClassParams: r must exceed d/2");
}

void SUNet::validate() const {
  if (dim != 1 && dim != 2) bad("SUNet: dim must be 1 or 2");
  if (J < 1) bad("SUNet: depth must be >= 1");
  if (grid.dim != dim) bad("SUNet: grid dimension differs from net dimension");
  if ((Eigen::Index(1) << J) > grid.n) bad("SUNet: grid too coarse for depth");
  const auto uj = static_cast<std::size_t>(J);
  if (alpha.size() != uj || a.size() != uj || beta.size() != uj || b.size() != uj || tau.size() != uj)
    bad("SUNet: every per-level list must have J entries");
  for (int j = 0; j < J; ++j) {
    if (beta[j].size() != static_cast<std::size_t>(channels()) || b[j].size() != static_cast<std::size_t>(channels()))
      bad(level_name("SUNet: wrong detail channel count", j));
    if (alpha[j].dim() != dim || a[j].dim() != dim) bad(level_name("SUNet: filter dimension mismatch", j));
    for (int e = 0; e < channels(); ++e)
      if (beta[j][e].dim() != dim || b[j][e].dim() != dim) bad(level_name("SUNet: filter dimension mismatch", j));
  }
  grid.require(psi, "SUNet psi");
  grid.require(phi, "SUNet phi");
}

std::string to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::Alpha: return "alpha";
    case ParamGroup::A: return "a";
    case ParamGroup::Beta: return "beta";
    case ParamGroup::B: return "b";
    case ParamGroup::Tau: return "tau";
    default: return "psi";
  }
}

ParamGroup param_group_from_string(const std::string& s) {
  for (auto g : {ParamGroup::Alpha, ParamGroup::A, ParamGroup::Beta, ParamGroup::B, ParamGroup::Tau, ParamGroup::Psi})
    if (to_string(g) == s) return g;
  bad("unknown parameter group '" + s + "'");
}

std::string to_string(const ParamRef& p) {
  std::string s = to_string(p.group);
  if (p.group == ParamGroup::Psi) return s;
  s += "[" + std::to_string(p.level);
  if (p.group == ParamGroup::Beta || p.group == ParamGroup::B) s += "," + std::to_string(p.channel + 1);
  return s + "]";
}

Tensor first_layer(const GridFunction<double>& signal, const GridFunction<double>& psi, int J, const Grid& grid) {
  grid.require(signal, "first_layer signal");
  grid.require(psi, "first_layer psi");
  if (J < 0 || (Eigen::Index(1) << J) > grid.n)
    bad("first_layer: grid with " + std::to_string(grid.n) + " points is not divisible into 2^" + std::to_string(J));
  const Eigen::Index m = Eigen::Index(1) << J, step = grid.n >> J;
  const auto corr = circular_correlate(signal, psi);
  const double cell = grid.cell();
  auto s = Tensor::zeros(grid.dim, {0, 0}, {m - 1, grid.dim == 2 ? m - 1 : 0});
  for (Eigen::Index k1 = 0; k1 <= s.hi(1); ++k1)
    for (Eigen::Index k0 = 0; k0 < m; ++k0) s(k0, k1) = cell * corr(k0 * step, k1 * step);
  return s;
}

ForwardTrace forward(const SUNet& net, const GridFunction<double>& signal) {
  net.validate();
  ForwardTrace tr;
  tr.from_signal = true;
  tr.input = signal;
  return run(net, first_layer(signal, net.psi, net.J, net.grid), std::move(tr));
}

ForwardTrace forward(const SUNet& net, const Tensor& s_J) {
  net.validate();
  if (s_J.dim() != net.dim) throw std::logic_error("forward: input dimension differs from net (level " + std::to_string(net.J) + ")");
  if (net.boundary == Boundary::Periodic)
    for (int ax = 0; ax < net.dim; ++ax)
      if (s_J.lo(ax) != 0 || s_J.extent(ax) != (Eigen::Index(1) << net.J))
        throw std::logic_error("forward: input at level " + std::to_string(net.J) + " must be indexed 0..2^J-1");
  return run(net, s_J, ForwardTrace{});
}

NetGradient zero_gradient(const SUNet& net) {
  NetGradient g;
  auto z = [](const Tensor& t) { return Tensor::zeros(t.dim(), t.lo(), t.hi()); };
  for (int j = 0; j < net.J; ++j) {
    g.alpha.push_back(z(net.alpha[j]));
    g.a.push_back(z(net.a[j]));
    g.beta.emplace_back();
    g.b.emplace_back();
    for (int e = 0; e < net.channels(); ++e) {
      g.beta[j].push_back(z(net.beta[j][e]));
      g.b[j].push_back(z(net.b[j][e]));
    }
  }
  g.tau.assign(static_cast<std::size_t>(net.J), 0.0);
  g.psi = net.grid.zeros();
  return g;
}

NetGradient backward(const SUNet& net, const ForwardTrace& tr, const GridFunction<double>& residual) {
  net.validate();
  net.grid.require(residual, "backward residual");
  const int J = net.J;
  const auto uj = static_cast<std::size_t>(J);
  if (tr.s.size() != uj + 1 || tr.sbar.size() != uj + 1 || tr.d.size() != uj || tr.dbar.size() != uj)
    bad("backward: trace depth does not match net");
  for (int j = 0; j < J; ++j)
    if (tr.d[j].size() != static_cast<std::size_t>(net.channels())) bad("backward: trace channel mismatch");
  const Boundary bd = net.boundary;
  NetGradient G = zero_gradient(net);

  // Expanding path, top down.
  Tensor gs = project_on_translates(residual, net.phi, J, net.grid, tr.sbar[J]);
  std::vector<std::vector<Tensor>> gdbar(uj);
  for (int j = J - 1; j >= 0; --j) {
    G.a[j] = up_conv_filter_grad(gs, tr.sbar[j], net.a[j], bd);
    for (int e = 0; e < net.channels(); ++e) {
      G.b[j][e] = up_conv_filter_grad(gs, tr.dbar[j][e], net.b[j][e], bd);
      gdbar[j].push_back(down_conv(net.b[j][e], gs, bd).restricted_to(tr.dbar[j][e]));
    }
    gs = down_conv(net.a[j], gs, bd).restricted_to(tr.sbar[j]);
  }

  // gs is now the gradient at sbar^(0) = s^(0); contracting path bottom up.
  for (int j = 0; j < J; ++j) {
    const Tensor& src = tr.s[j + 1];
    G.alpha[j] = down_conv_filter_grad(gs, src, net.alpha[j], bd);
    Tensor next = up_conv(net.alpha[j], gs, bd).restricted_to(src);
    for (int e = 0; e < net.channels(); ++e) {
      const Tensor& d = tr.d[j][e];
      Tensor gd = gdbar[j][e];
      double gt = 0;
      const double t = net.tau[j];
      for (Eigen::Index i = 0; i < d.values().size(); ++i) {
        const double v = d.values().data()[i];
        double& g = gd.values().data()[i];
        if (v > t) {
          gt -= g;
        } else if (v < -t) {
          gt += g;
        } else {
          g = 0;
        }
      }
      G.tau[j] += gt;
      G.beta[j][e] = down_conv_filter_grad(gd, src, net.beta[j][e], bd);
      next.values() += up_conv(net.beta[j][e], gd, bd).restricted_to(src).values();
    }
    gs = std::move(next);
  }

  if (tr.from_signal) {
    const Eigen::Index step = net.grid.n >> J;
    GridFunction<double> spikes = net.grid.zeros();
    for (Eigen::Index k1 = gs.lo(1); k1 <= gs.hi(1); ++k1)
      for (Eigen::Index k0 = gs.lo(0); k0 <= gs.hi(0); ++k0)
        spikes(detail::wrap(k0 * step, net.grid.n), net.dim == 2 ? detail::wrap(k1 * step, net.grid.n) : 0) +=
            gs(k0, k1);
    G.psi = net.grid.cell() * circular_correlate(tr.input, spikes);
  }
  return G;
}

void accumulate(NetGradient& into, const NetGradient& g, double scale) {
  for (std::size_t j = 0; j < into.alpha.size(); ++j) {
    into.alpha[j].values() += scale * g.alpha[j].values();
    into.a[j].values() += scale * g.a[j].values();
    for (std::size_t e = 0; e < into.beta[j].size(); ++e) {
      into.beta[j][e].values() += scale * g.beta[j][e].values();
      into.b[j][e].values() += scale * g.b[j][e].values();
    }
    into.tau[j] += scale * g.tau[j];
  }
  into.psi += scale * g.psi;
}

double squared_norm(const NetGradient& g) {
  double s = g.psi.square().sum();
  for (std::size_t j = 0; j < g.alpha.size(); ++j) {
    s += g.alpha[j].values().square().sum() + g.a[j].values().square().sum() + g.tau[j] * g.tau[j];
    for (std::size_t e = 0; e < g.beta[j].size(); ++e)
      s += g.beta[j][e].values().square().sum() + g.b[j][e].values().square().sum();
  }
  return s;
}

void apply_step(SUNet& net, const NetGradient& g, double scale) {
  for (int j = 0; j < net.J; ++j) {
    net.alpha[j].values() += scale * g.alpha[j].values();
    net.a[j].values() += scale * g.a[j].values();
    for (int e = 0; e < net.channels(); ++e) {
      net.beta[j][e].values() += scale * g.beta[j][e].values();
      net.b[j][e].values() += scale * g.b[j][e].values();
    }
    net.tau[j] += scale * g.tau[j];
  }
  net.psi += scale * g.psi;
}

std::vector<ParamRef> parameter_groups(const SUNet& net) {
  std::vector<ParamRef> out;
  for (int j = 0; j < net.J; ++j) {
    out.push_back({ParamGroup::Alpha, j, 0});
    out.push_back({ParamGroup::A, j, 0});
    for (int e = 0; e < net.channels(); ++e) {
      out.push_back({ParamGroup::Beta, j, e});
      out.push_back({ParamGroup::B, j, e});
    }
    out.push_back({ParamGroup::Tau, j, 0});
  }
  out.push_back({ParamGroup::Psi, 0, 0});
  return out;
}

namespace {

template <typename Net>
auto& filter_of(Net& net, const ParamRef& p) {
  if (p.level < 0 || p.level >= static_cast<int>(net.alpha.size())) bad("filter: level out of range");
  switch (p.group) {
    case ParamGroup::Alpha: return net.alpha[p.level];
    case ParamGroup::A: return net.a[p.level];
    case ParamGroup::Beta:
    case ParamGroup::B: {
      auto& lv = p.group == ParamGroup::Beta ? net.beta[p.level] : net.b[p.level];
      if (p.channel < 0 || p.channel >= static_cast<int>(lv.size())) bad("filter: channel out of range");
      return lv[p.channel];
    }
    default: bad("filter: " + to_string(p.group) + " is not a discrete filter");
  }
}

}  // namespace

Tensor& filter(SUNet& net, const ParamRef& p) { return filter_of(net, p); }
const Tensor& filter(const SUNet& net, const ParamRef& p) { return filter_of(net, p); }
const Tensor& filter(const NetGradient& g, const ParamRef& p) { return filter_of(g, p); }

SUNet project_constraints(const SUNet& net, const NetClassParams& params) {
  SUNet out = net;
  for_each_filter(out, [&](Tensor& t) {
    auto& v = t.values();
    if (support_size(t) > params.S_filter) {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](Eigen::Index x, Eigen::Index y) { return std::abs(v.data()[x]) > std::abs(v.data()[y]); });
      for (std::size_t i = static_cast<std::size_t>(params.S_filter); i < idx.size(); ++i) v.data()[idx[i]] = 0;
    }
    const double n = l2_norm(t);
    if (n > 1) v /= n;
  });
  for (double& t : out.tau) t = std::clamp(t, 0.0, params.kappa_tau);
  const double pn = quad_norm(out.grid, out.psi);
  if (pn > params.C_psi_L2) out.psi *= params.C_psi_L2 / pn;
  // Sobolev proxy, only past the 5% tolerance so that feasible nets stay
  // bitwise unchanged. Shrinking never raises the L2 norm.
  if (std::isfinite(params.C_psi_Hr) && sobolev_norm(out.grid, out.psi, params.r) > params.C_psi_Hr * 1.05)
    out.psi = sobolev_ball_projection(out.grid, out.psi, params.r, params.C_psi_Hr);
  return out;
}

std::vector<std::string> class_violations(const SUNet& net, const NetClassParams& params) {
  std::vector<std::string> out;
  int idx = 0;
  for_each_filter(net, [&](const Tensor& t) {
    if (support_size(t) > params.S_filter)
      out.push_back("filter " + std::to_string(idx) + ": support " + std::to_string(support_size(t)) + " > " +
                    std::to_string(params.S_filter));
    if (l2_norm(t) > 1 + 1e-12) out.push_back("filter " + std::to_string(idx) + ": norm > 1");
    ++idx;
  });
  for (int j = 0; j < net.J; ++j)
    if (!(net.tau[j] >= 0 && net.tau[j] <= params.kappa_tau))
      out.push_back("tau_" + std::to_string(j) + " outside [0, kappa_tau]");
  if (quad_norm(net.grid, net.psi) > params.C_psi_L2 * (1 + 1e-12)) out.push_back("psi: L2 norm above cap");
  if (std::isfinite(params.C_psi_Hr) && sobolev_norm(net.grid, net.psi, params.r) > params.C_psi_Hr * 1.05)
    out.push_back("psi: H^r proxy above cap");
  const auto phi = sample_father_wavelet(net.M, net.J, net.grid);
  if ((phi - net.phi).abs().maxCoeff() > 1e-12) out.push_back("phi: not the fixed scale-J father");
  return out;
}

SUNet preset_wavelet_thresholding(int M, int J, const std::vector<double>& taus, const Grid& grid, Boundary boundary) {
  if (static_cast<int>(taus.size()) != J) bad("preset_wavelet_thresholding: need one threshold per level");
  for (double t : taus)
    if (!(t >= 0)) bad("preset_wavelet_thresholding: thresholds must be >= 0");
  const auto bank = daubechies_filters<double>(M, grid.dim);
  SUNet net;
  net.J = J;
  net.dim = grid.dim;
  net.M = M;
  net.boundary = boundary;
  net.grid = grid;
  const Tensor h = reversed(bank.h);
  std::vector<Tensor> g;
  for (const auto& t : bank.g) g.push_back(reversed(t));
  for (int j = 0; j < J; ++j) {
    net.alpha.push_back(h);
    net.a.push_back(h);
    net.beta.push_back(g);
    net.b.push_back(g);
  }
  net.tau = taus;
  net.phi = sample_father_wavelet(M, J, grid);
  net.psi = net.phi;
  net.validate();
  return net;
}

SUNet preset_wvd(const SmoothingOperator& op, int M, int J, const std::vector<double>& taus, const Grid& grid,
                 Boundary boundary) {
  SUNet net = preset_wavelet_thresholding(M, J, taus, grid, boundary);
  net.psi = vaguelette(op, M, J, grid);
  return net;
}

NetClassParams preset_class_params(const SUNet& net, double kappa_tau, int r) {
  NetClassParams p;
  p.r = r;
  p.R = r;
  p.S_filter = 1;
  for_each_filter(net, [&](const Tensor& t) { p.S_filter = std::max<int>(p.S_filter, static_cast<int>(support_size(t))); });
  p.kappa_tau = kappa_tau;
  for (double t : net.tau) p.kappa_tau = std::max(p.kappa_tau, t);
  p.C_psi_L2 = std::max(1.0, quad_norm(net.grid, net.psi));
  p.C_psi_Hr = sobolev_norm(net.grid, net.psi, r);
  return p;
}

SUNet random_feasible_net(const RandomNetSpec& spec, const Grid& grid, CounterRng& rng) {
  if (spec.taps < 1) bad("random_feasible_net: taps must be >= 1");
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  SUNet net;
  net.J = spec.J;
  net.dim = spec.dim;
  net.M = spec.M;
  net.boundary = spec.boundary;
  net.grid = grid;
  auto draw = [&] {
    const Eigen::Index t = spec.taps - 1;
    auto f = Tensor::zeros(spec.dim, {-t, spec.dim == 2 ? -t : 0}, {0, 0});
    for (Eigen::Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = normal(rng);
    f.values() *= (1.0 - unit(rng)) / l2_norm(f);
    return f;
  };
  for (int j = 0; j < spec.J; ++j) {
    net.alpha.push_back(draw());
    net.a.push_back(draw());
    net.beta.emplace_back();
    net.b.emplace_back();
    for (int e = 0; e < net.channels(); ++e) {
      net.beta[j].push_back(draw());
      net.b[j].push_back(draw());
    }
    net.tau.push_back(spec.kappa_tau * unit(rng));
  }
  net.phi = sample_father_wavelet(spec.M, spec.J, grid);
  net.psi = net.phi;
  if (spec.psi_noise > 0) {
    GridFunction<double> w = grid.zeros();
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    net.psi += spec.psi_noise * w / quad_norm(grid, w);
  }
  const double pn = quad_norm(grid, net.psi);
  if (pn > 1) net.psi /= pn;
  net.validate();
  return net;
}

}  // namespace sunet
