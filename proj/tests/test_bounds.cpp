#include "sunet/bounds.hpp"

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

struct Instance {
  SUNet net;
  GridFunction<double> input;
};

Instance random_instance(CounterRng& rng, Boundary bd) {
  std::uniform_int_distribution<int> U(0, 1 << 20);
  RandomNetSpec sp;
  sp.dim = 1 + U(rng) % 2;
  sp.J = 1 + U(rng) % (sp.dim == 1 ? 4 : 3);
  sp.taps = 1 + U(rng) % 4;
  sp.M = 2;
  sp.boundary = bd;
  Grid g(sp.dim, sp.dim == 1 ? 128 : 32);
  auto net = random_feasible_net(sp, g, rng);
  return {net, white(g, rng)};
}

}  // namespace

TEST(SizeBounds, ZeroInputBothSidesZero) {
  Grid g(1, 64);
  CounterRng rng(1);
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  auto tr = forward(net, g.zeros());
  auto rep = verify_size_bounds(net, tr, max_coefficient(tr.s[net.J]));
  EXPECT_TRUE(rep.pass());
  for (const auto& c : rep.checks) {
    EXPECT_EQ(c.lhs, 0.0) << c.name;
    EXPECT_EQ(c.rhs, 0.0) << c.name;
  }
}

TEST(SizeBounds, RandomWhiteInputsAllPass) {
  for (auto bd : {Boundary::Periodic, Boundary::Paper}) {
    CounterRng rng(2);
    for (int t = 0; t < 200; ++t) {
      auto [net, y] = random_instance(rng, bd);
      auto tr = forward(net, y);
      auto rep = verify_size_bounds(net, tr, max_coefficient(tr.s[net.J]));
      ASSERT_TRUE(rep.pass()) << rep.first_failure()->name << " trial " << t;
      EXPECT_GE(rep.worst_margin(), 0.0);
    }
  }
}

TEST(SizeBounds, ThresholdShrinksAndZeroThresholdIsEquality) {
  Grid g(1, 64);
  CounterRng rng(3);
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  std::fill(net.tau.begin(), net.tau.end(), 0.0);
  auto tr = forward(net, white(g, rng));
  for (int j = 0; j < net.J; ++j) EXPECT_EQ(l2_norm(tr.dbar[j][0]), l2_norm(tr.d[j][0]));
}

// The per-level chain ||gamma *down a|| <= ||gamma|| ||a|| is not a theorem
// for filters longer than two taps; with nearly constant inputs the slack in
// ||s^(J)|| <= 2^{Jd/2} max|s_k| vanishes and rare violations appear.
TEST(SizeBounds, SmoothInputsCanViolateRarely) {
  Grid g(1, 128);
  CounterRng rng(3);
  std::normal_distribution<double> N;
  int fails = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    RandomNetSpec sp;
    sp.J = 1 + t % 4;
    sp.taps = 1 + (t / 4) % 4;
    auto net = random_feasible_net(sp, g, rng);
    PriorParams p;
    p.J_max = 6;
    p.M = 4;
    p.s = 3;
    p.law = PriorParams::Law::Holder;
    auto tr = forward(net, sample_prior(p, g, rng));
    fails += !verify_size_bounds(net, tr, max_coefficient(tr.s[net.J])).pass();
  }
  EXPECT_LT(fails, trials / 100);
}

TEST(PerturbationBounds, ZeroDeltaGivesZeroZero) {
  Grid g(1, 64);
  CounterRng rng(4);
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  auto y = white(g, rng);
  auto c = verify_perturbation_bounds(net, ParamRef{ParamGroup::A, 1, 0}, Tensor::zeros1(-3, 0), y);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(verify_perturbation_bounds(net, ParamRef{ParamGroup::Tau, 0, 0}, 0.0, y).lhs, 0.0);
  EXPECT_EQ(verify_perturbation_bounds(net, ParamRef{ParamGroup::Psi, 0, 0}, g.zeros(), y).rhs, 0.0);
}

TEST(PerturbationBounds, WrongSelectorRejected) {
  Grid g(1, 64);
  CounterRng rng(4);
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  auto y = white(g, rng);
  EXPECT_THROW(verify_perturbation_bounds(net, ParamRef{ParamGroup::Tau, 0, 0}, Tensor::zeros1(0, 0), y),
               std::invalid_argument);
  EXPECT_THROW(verify_perturbation_bounds(net, ParamRef{ParamGroup::A, 0, 0}, 0.1, y), std::invalid_argument);
  EXPECT_THROW(verify_perturbation_bounds(net, ParamRef{ParamGroup::Tau, 7, 0}, 0.1, y), std::invalid_argument);
  EXPECT_THROW(verify_perturbation_bounds(net, ParamRef{ParamGroup::Beta, 0, 3}, Tensor::zeros1(0, 0), y),
               std::invalid_argument);
}

TEST(PerturbationBounds, CoarseVersusDetailRatio) {
  for (int d = 1; d <= 2; ++d) {
    Grid g(d, 32);
    CounterRng rng(5);
    RandomNetSpec sp;
    sp.dim = d;
    auto net = random_feasible_net(sp, g, rng);
    for (int k = 0; k < net.J; ++k) {
      const double ra = perturbation_rhs(net, ParamRef{ParamGroup::A, k, 0}, 0.37, 1.3);
      const double rb = perturbation_rhs(net, ParamRef{ParamGroup::B, k, 0}, 0.37, 1.3);
      EXPECT_NEAR(ra / rb, 1 + std::exp2(d) * k, 1e-12);
    }
  }
}

TEST(PerturbationBounds, RandomTrialsAllGroupsPass) {
  for (auto bd : {Boundary::Periodic, Boundary::Paper}) {
    CounterRng rng(6);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(-1, 1);
    for (int t = 0; t < 100; ++t) {
      auto [net, y] = random_instance(rng, bd);
      for (const auto& p : parameter_groups(net)) {
        BoundCheck c;
        if (p.group == ParamGroup::Tau) {
          c = verify_perturbation_bounds(net, p, 0.5 * U(rng), y);
        } else if (p.group == ParamGroup::Psi) {
          c = verify_perturbation_bounds(net, p, GridFunction<double>(0.2 * white(net.grid, rng)), y);
        } else {
          Tensor delta = filter(net, p);
          for (Eigen::Index i = 0; i < delta.size(); ++i) delta.values().data()[i] = 0.3 * N(rng);
          c = verify_perturbation_bounds(net, p, delta, y);
        }
        ASSERT_TRUE(c.pass) << c.name << " lhs " << c.lhs << " rhs " << c.rhs << " trial " << t;
      }
    }
  }
}

TEST(NetDistance, SelfIsZeroAndSingleFilterMatchesPerturbation) {
  Grid g(1, 64);
  CounterRng rng(7);
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  auto y = white(g, rng);
  auto self = verify_net_distance_bound(net, net, y);
  EXPECT_EQ(self.lhs, 0.0);
  EXPECT_EQ(self.rhs, 0.0);
  Tensor delta = Tensor::zeros1(-3, 0);
  delta(-1) = 0.2;
  const ParamRef p{ParamGroup::Alpha, 2, 0};
  auto G = perturbed(net, p, delta);
  auto pair = verify_net_distance_bound(net, G, y);
  auto single = verify_perturbation_bounds(net, p, delta, y);
  EXPECT_EQ(pair.lhs, single.lhs);
  EXPECT_NEAR(pair.rhs, single.rhs, 1e-14 * single.rhs);
}

TEST(NetDistance, RandomPairsPassAndMismatchRejected) {
  CounterRng rng(8);
  for (int t = 0; t < 100; ++t) {
    auto [F, y] = random_instance(rng, t % 2 ? Boundary::Paper : Boundary::Periodic);
    RandomNetSpec sp;
    sp.dim = F.dim;
    sp.J = F.J;
    sp.M = F.M;
    sp.taps = 1 + t % 4;
    sp.boundary = F.boundary;
    auto G = random_feasible_net(sp, F.grid, rng);
    auto c = verify_net_distance_bound(F, G, y);
    ASSERT_TRUE(c.pass) << "lhs " << c.lhs << " rhs " << c.rhs << " trial " << t;
  }
  Grid g(1, 64);
  RandomNetSpec sp;
  auto F = random_feasible_net(sp, g, rng);
  sp.J = 2;
  auto G = random_feasible_net(sp, g, rng);
  EXPECT_THROW(verify_net_distance_bound(F, G, g.zeros()), std::invalid_argument);
}

TEST(RiskBound, HoldsAndNeedsTwoDraws) {
  Grid g(1, 128);
  CounterRng rng(9);
  PriorParams prior;
  prior.J_max = 5;
  prior.M = 3;
  auto op = SmoothingOperator::sobolev(1, g);
  for (double sigma : {0.1, 1.0}) {
    auto net = random_feasible_net(RandomNetSpec{}, g, rng);
    auto f = sample_prior(prior, g, rng);
    auto r = verify_risk_bound(net, op, f, sigma, 20, rng);
    EXPECT_TRUE(r.pass) << r.mean << " vs " << r.bound;
    EXPECT_GT(r.std_error, 0.0);
  }
  auto net = random_feasible_net(RandomNetSpec{}, g, rng);
  EXPECT_THROW(verify_risk_bound(net, op, g.zeros(), 0.1, 1, rng), std::invalid_argument);
}
