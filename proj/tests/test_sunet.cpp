#include "sunet/daubechies.hpp"
#include "sunet/network.hpp"
#include "sunet/wavelets.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sunet;

namespace {

GridFunction<double> white(const Grid& g, CounterRng& rng) {
  std::normal_distribution<double> N;
  GridFunction<double> f = g.zeros();
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = N(rng);
  return f;
}

Tensor random_coeffs(int dim, Eigen::Index m, CounterRng& rng) {
  std::normal_distribution<double> N;
  auto t = Tensor::zeros(dim, {0, 0}, {m - 1, dim == 2 ? m - 1 : 0});
  for (Eigen::Index i = 0; i < t.size(); ++i) t.values().data()[i] = N(rng);
  return t;
}

double loss(const SUNet& net, const GridFunction<double>& y, const GridFunction<double>& f) {
  const double r = quad_norm(net.grid, GridFunction<double>(forward(net, y).output - f));
  return 0.5 * r * r;
}

// Sign pattern of every pre-activation relative to its threshold.
std::vector<int> active_pattern(const SUNet& net, const GridFunction<double>& y) {
  auto tr = forward(net, y);
  std::vector<int> out;
  for (int j = 0; j < net.J; ++j)
    for (const auto& d : tr.d[j])
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double v = d.values().data()[i];
        out.push_back(v > net.tau[j] ? 1 : (v < -net.tau[j] ? -1 : 0));
      }
  return out;
}

double& entry(SUNet& net, const ParamRef& p, Eigen::Index i) {
  if (p.group == ParamGroup::Tau) return net.tau[p.level];
  if (p.group == ParamGroup::Psi) return net.psi.data()[i];
  return filter(net, p).values().data()[i];
}

double entry(const NetGradient& g, const ParamRef& p, Eigen::Index i) {
  if (p.group == ParamGroup::Tau) return g.tau[p.level];
  if (p.group == ParamGroup::Psi) return g.psi.data()[i];
  return filter(g, p).values().data()[i];
}

Eigen::Index group_size(const SUNet& net, const ParamRef& p) {
  if (p.group == ParamGroup::Tau) return 1;
  if (p.group == ParamGroup::Psi) return net.psi.size();
  return filter(net, p).size();
}

}  // namespace

TEST(FirstLayer, DeltaAndConstant) {
  Grid g(1, 16);
  GridFunction<double> psi = g.zeros();
  psi(0) = 16;  // h^{-1} delta
  GridFunction<double> f(16, 1);
  for (int i = 0; i < 16; ++i) f(i) = i;
  auto s = first_layer(f, psi, 2, g);
  ASSERT_EQ(s.extent(0), 4);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s(k), 4.0 * k, 1e-12);
  auto c = first_layer(GridFunction<double>(GridFunction<double>::Constant(16, 1, 2.0)),
                       GridFunction<double>(GridFunction<double>::Constant(16, 1, 1.0)), 3, g);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(c(k), 2.0, 1e-12);
  EXPECT_THROW(first_layer(f, psi, 5, g), std::invalid_argument);
}

TEST(Forward, PresetMatchesThresholdOracle) {
  CounterRng rng(21);
  for (int d = 1; d <= 2; ++d)
    for (auto bd : {Boundary::Periodic, Boundary::Paper})
      for (int M = 1; M <= 5; ++M)
        for (int J : {1, 3, 6}) {
          if (d == 2 && J > 4) continue;
          Grid g(d, d == 1 ? 256 : 32);
          if ((1 << J) > g.n) continue;
          std::uniform_real_distribution<double> U(0, 1);
          std::vector<double> taus;
          for (int j = 0; j < J; ++j) taus.push_back(U(rng));
          auto net = preset_wavelet_thresholding(M, J, taus, g, bd);
          auto s = random_coeffs(d, Eigen::Index(1) << J, rng);
          auto tr = forward(net, s);
          auto oracle = wavelet_threshold_oracle(s, daubechies_filters(M, d), taus, bd);
          ASSERT_TRUE(tr.sbar[J].same_shape(oracle)) << "d=" << d << " M=" << M << " J=" << J;
          EXPECT_LE((tr.sbar[J].values() - oracle.values()).abs().maxCoeff(), 1e-10)
              << "d=" << d << " M=" << M << " J=" << J << " " << to_string(bd);
        }
}

TEST(Forward, ZeroThresholdIsIdentityOnCoefficients) {
  Grid g(1, 128);
  CounterRng rng(4);
  auto net = preset_wavelet_thresholding(4, 5, std::vector<double>(5, 0.0), g);
  auto s = random_coeffs(1, 32, rng);
  EXPECT_LE((forward(net, s).sbar[5].values() - s.values()).abs().maxCoeff(), 1e-12);
}

TEST(Forward, ZeroFiltersGiveZeroOutput) {
  Grid g(2, 16);
  CounterRng rng(5);
  RandomNetSpec spec;
  spec.dim = 2;
  spec.J = 2;
  auto net = random_feasible_net(spec, g, rng);
  for (auto& t : net.a) t.values().setZero();
  for (auto& lv : net.b)
    for (auto& t : lv) t.values().setZero();
  EXPECT_EQ(forward(net, white(g, rng)).output.abs().maxCoeff(), 0.0);
}

TEST(Forward, RejectsInconsistentInputs) {
  Grid g(1, 64);
  auto net = preset_wavelet_thresholding(2, 3, {0.1, 0.1, 0.1}, g);
  EXPECT_THROW(forward(net, Tensor::zeros1(0, 6)), std::logic_error);
  EXPECT_THROW(forward(net, Grid(1, 32).zeros()), std::invalid_argument);
  auto broken = net;
  broken.beta[1].pop_back();
  EXPECT_THROW(forward(broken, g.zeros()), std::invalid_argument);
}

TEST(Forward, PiecewiseLinearInInput) {
  Grid g(1, 128);
  CounterRng rng(8);
  RandomNetSpec spec;
  auto net = random_feasible_net(spec, g, rng);
  auto y = white(g, rng), u = white(g, rng);
  // Along a short segment with no activation change the map is affine.
  const double t = 1e-7;
  auto p0 = active_pattern(net, y);
  GridFunction<double> y1 = y + t * u, y2 = y + 2 * t * u;
  ASSERT_EQ(p0, active_pattern(net, y2));
  auto F0 = forward(net, y).output, F1 = forward(net, y1).output, F2 = forward(net, y2).output;
  EXPECT_LE((F2 - 2 * F1 + F0).abs().maxCoeff(), 1e-12 * (1 + F0.abs().maxCoeff()));
}

TEST(Forward, WvdOnIdentityEqualsThresholding) {
  Grid g(1, 256);
  std::vector<double> taus{0.2, 0.1, 0.05};
  auto a = preset_wavelet_thresholding(3, 3, taus, g);
  auto b = preset_wvd(SmoothingOperator::identity(g), 3, 3, taus, g);
  CounterRng rng(2);
  auto y = white(g, rng);
  EXPECT_LE((forward(a, y).output - forward(b, y).output).abs().maxCoeff(), 1e-9);
}

TEST(Forward, NoiselessDeconvolutionOfResolvedSignal) {
  // f in V_J is recovered from Tf exactly (up to quadrature) by the WVD with zero thresholds.
  Grid g(1, 1024);
  const int M = 4, J = 4;
  auto op = SmoothingOperator::sobolev(1, g);
  auto phi = sample_father_wavelet(M, J, g);
  CounterRng rng(12);
  auto c = random_coeffs(1, 16, rng);
  auto f = expand_on_grid(c, phi, J, g);
  auto net = preset_wvd(op, M, J, std::vector<double>(J, 0.0), g);
  auto F = forward(net, apply(op, f)).output;
  EXPECT_LE(quad_norm(g, GridFunction<double>(F - f)), 1e-3 * quad_norm(g, f));
}

TEST(Backward, MatchesFiniteDifferences) {
  CounterRng rng(31);
  int checked = 0;
  for (int trial = 0; trial < 12; ++trial) {
    RandomNetSpec spec;
    spec.dim = trial % 3 == 2 ? 2 : 1;
    spec.J = spec.dim == 2 ? 2 : 1 + trial % 4;
    spec.taps = 2 + trial % 3;
    spec.M = 2;
    spec.kappa_tau = 0.05;
    spec.boundary = trial % 2 ? Boundary::Paper : Boundary::Periodic;
    Grid g(spec.dim, spec.dim == 1 ? 64 : 16);
    auto net = random_feasible_net(spec, g, rng);
    auto y = white(g, rng), f = white(g, rng);
    auto tr = forward(net, y);
    auto G = backward(net, tr, GridFunction<double>(tr.output - f));
    const auto pattern = active_pattern(net, y);
    const double eps = 1e-6;
    std::uniform_int_distribution<int> pick(0, 1 << 20);
    for (const auto& p : parameter_groups(net)) {
      const Eigen::Index n = group_size(net, p);
      for (int rep = 0; rep < 2; ++rep) {
        const Eigen::Index i = pick(rng) % n;
        SUNet plus = net, minus = net;
        entry(plus, p, i) += eps;
        entry(minus, p, i) -= eps;
        if (active_pattern(plus, y) != pattern || active_pattern(minus, y) != pattern) continue;
        const double fd = (loss(plus, y, f) - loss(minus, y, f)) / (2 * eps);
        const double an = entry(G, p, i);
        EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd)))
            << to_string(p) << " entry " << i << " trial " << trial << " " << to_string(spec.boundary);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(Backward, CoefficientInputHasZeroPsiGradient) {
  Grid g(1, 64);
  CounterRng rng(3);
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  auto tr = forward(net, random_coeffs(1, 8, rng));
  auto G = backward(net, tr, white(g, rng));
  EXPECT_EQ(G.psi.abs().maxCoeff(), 0.0);
}

TEST(Backward, ThresholdGradientSign) {
  // Raising tau moves the output further from the unthresholded target.
  Grid g(1, 64);
  auto net = preset_wavelet_thresholding(1, 2, {0.1, 0.1}, g);
  auto s = Tensor::zeros1(0, 3);
  s(0) = 5;
  s(1) = -3;
  auto tr = forward(net, s);
  auto target = forward(preset_wavelet_thresholding(1, 2, {0.0, 0.0}, g), s).output;
  auto G = backward(net, tr, GridFunction<double>(tr.output - target));
  EXPECT_GT(G.tau[1], 0.0);
}

TEST(Projection, IdempotentAndClamps) {
  Grid g(1, 64);
  CounterRng rng(6);
  RandomNetSpec spec;
  spec.taps = 6;
  auto net = random_feasible_net(spec, g, rng);
  NetClassParams p;
  p.S_filter = 3;
  p.kappa_tau = 0.5;
  p.C_psi_L2 = 0.5;
  net.alpha[0].values() *= 2 / l2_norm(net.alpha[0]);
  net.tau[1] = -1;
  net.tau[2] = 9;
  auto q = project_constraints(net, p);
  EXPECT_TRUE(class_violations(q, p).empty());
  EXPECT_EQ(q.tau[1], 0.0);
  EXPECT_EQ(q.tau[2], 0.5);
  EXPECT_LE((q.alpha[0].values() != 0).count(), 3);
  EXPECT_NEAR(quad_norm(g, q.psi), std::min(0.5, quad_norm(g, net.psi)), 1e-12);
  auto qq = project_constraints(q, p);
  for (const auto& r : parameter_groups(q)) {
    if (r.group == ParamGroup::Tau || r.group == ParamGroup::Psi) continue;
    EXPECT_TRUE((filter(q, r).values() == filter(qq, r).values()).all()) << to_string(r);
  }
  EXPECT_TRUE((q.psi == qq.psi).all());
  EXPECT_EQ(q.tau, qq.tau);
}

TEST(Projection, NormTwoBecomesOne) {
  Grid g(1, 32);
  auto net = preset_wavelet_thresholding(2, 2, {0.1, 0.1}, g);
  net.a[1].values() *= 2;
  NetClassParams p;
  p.S_filter = 4;
  auto q = project_constraints(net, p);
  EXPECT_NEAR(l2_norm(q.a[1]), 1.0, 1e-15);
  EXPECT_TRUE((q.a[1].values() == net.a[1].values() / 2).all());
}

TEST(Projection, FeasibleNetUntouched) {
  Grid g(2, 16);
  CounterRng rng(7);
  RandomNetSpec spec;
  spec.dim = 2;
  spec.J = 2;
  auto net = random_feasible_net(spec, g, rng);
  NetClassParams p;
  p.S_filter = 16;
  auto q = project_constraints(net, p);
  for (const auto& r : parameter_groups(net)) {
    if (r.group == ParamGroup::Tau || r.group == ParamGroup::Psi) continue;
    EXPECT_TRUE((filter(q, r).values() == filter(net, r).values()).all());
  }
  EXPECT_TRUE((q.psi == net.psi).all());
  EXPECT_EQ(q.tau, net.tau);
}

TEST(Presets, FeasibleUnderTheirClassParams) {
  Grid g(1, 256);
  auto net = preset_wvd(SmoothingOperator::sobolev(1, g), 3, 3, {0.1, 0.2, 0.3}, g);
  auto p = preset_class_params(net, 0.25, 2);
  EXPECT_EQ(p.S_filter, 6);
  EXPECT_GE(p.kappa_tau, 0.3);
  EXPECT_TRUE(class_violations(net, p).empty());
  EXPECT_THROW(preset_wavelet_thresholding(3, 3, {0.1}, g), std::invalid_argument);
  EXPECT_THROW(preset_wavelet_thresholding(3, 3, {0.1, -1, 0}, g), std::invalid_argument);
}

TEST(ParamRefs, StringsAndCounts) {
  Grid g(2, 16);
  auto net = preset_wavelet_thresholding(1, 2, {0, 0}, g);
  EXPECT_EQ(parameter_groups(net).size(), 2u * (2 + 6 + 1) + 1);
  EXPECT_EQ(to_string(ParamRef{ParamGroup::Beta, 1, 2}), "beta[1,3]");
  EXPECT_EQ(param_group_from_string("tau"), ParamGroup::Tau);
  EXPECT_THROW(param_group_from_string("gamma"), std::invalid_argument);
  EXPECT_THROW(filter(net, ParamRef{ParamGroup::Tau, 0, 0}), std::invalid_argument);
}

TEST(Projection, SobolevCapDampsHighFrequencies) {
  Grid g(1, 128);
  CounterRng rng(9);
  auto net = preset_wavelet_thresholding(3, 3, {0.1, 0.1, 0.1}, g);
  auto p = preset_class_params(net, 1, 2);
  GridFunction<double> rough = white(g, rng);
  net.psi += 0.05 * rough / quad_norm(g, rough);
  const double before = quad_norm(g, net.psi);
  ASSERT_GT(sobolev_norm(g, net.psi, 2), 1.05 * p.C_psi_Hr);
  auto q = project_constraints(net, p);
  EXPECT_LE(sobolev_norm(g, q.psi, 2), p.C_psi_Hr * (1 + 1e-9));
  EXPECT_LE(quad_norm(g, q.psi), before);
  // The smooth part survives: the projected psi stays close to phi.
  EXPECT_LT(quad_norm(g, GridFunction<double>(q.psi - net.phi)), 0.05);
  EXPECT_TRUE(class_violations(q, p).empty());
}
