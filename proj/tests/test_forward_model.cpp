#include "sunet/forward_model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sunet;

namespace {

GridFunction<double> random_grid(const Grid& g, CounterRng& rng) {
  std::normal_distribution<double> N;
  GridFunction<double> f = g.zeros();
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = N(rng);
  return f;
}

}  // namespace

TEST(Rng, DeterministicAndStreamsDiffer) {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(CounterRng(42)(), c());
  EXPECT_NE(a.derive(1)(), a.derive(2)());
  EXPECT_EQ(a.derive(7)(), b.derive(7)());
}

TEST(Apply, IdentityConstantCosine) {
  Grid g(1, 64);
  CounterRng rng(1);
  auto f = random_grid(g, rng);
  EXPECT_LE((apply(SmoothingOperator::identity(g), f) - f).abs().maxCoeff(), 1e-12);
  auto op = SmoothingOperator::sobolev(1, g);
  GridFunction<double> c = GridFunction<double>::Constant(64, 1, 2.5);
  EXPECT_LE((apply(op, c) - 2.5).abs().maxCoeff(), 1e-12);
  GridFunction<double> cosine(64, 1);
  for (int i = 0; i < 64; ++i) cosine(i) = std::cos(2 * M_PI * i / 64.0);
  const double gain = 1 / (1 + 4 * M_PI * M_PI);
  EXPECT_LE((apply(op, cosine) - gain * cosine).abs().maxCoeff(), 1e-12);
  EXPECT_THROW(apply(op, Grid(1, 32).zeros()), std::invalid_argument);
}

TEST(Apply, LinearShiftInvariantInvertibleBounded) {
  for (int d = 1; d <= 2; ++d) {
    Grid g(d, d == 1 ? 128 : 32);
    CounterRng rng(2);
    auto op = SmoothingOperator::sobolev(2, g);
    auto f = random_grid(g, rng), u = random_grid(g, rng);
    GridFunction<double> lin = apply(op, GridFunction<double>(2.0 * f - 3.0 * u));
    EXPECT_LE((lin - (2.0 * apply(op, f) - 3.0 * apply(op, u))).abs().maxCoeff(), 1e-12);
    EXPECT_LE((apply(op, circular_shift(f, 5, 3)) - circular_shift(apply(op, f), 5, 3)).abs().maxCoeff(), 1e-12);
    auto op1 = SmoothingOperator::sobolev(1, g);
    GridFunction<double> inv_sym = op1.symbol.inverse();
    auto inv = SmoothingOperator::custom(inv_sym, -2, g);
    EXPECT_LE((apply(inv, apply(op1, f)) - f).abs().maxCoeff(), 1e-10 * f.abs().maxCoeff());
    EXPECT_LE(quad_norm(g, apply(op, f)), op.C_T * quad_norm(g, f) * (1 + 1e-12));
    EXPECT_DOUBLE_EQ(op.a1, 1.0);
    EXPECT_DOUBLE_EQ(op.a2, 1.0);
    EXPECT_DOUBLE_EQ(op.C_T, 1.0);
    EXPECT_EQ(op.beta, 4);
  }
}

TEST(Vaguelette, IdentityIsFather) {
  Grid g(1, 256);
  auto psi = vaguelette(SmoothingOperator::identity(g), 3, 2, g);
  EXPECT_LE((psi - sample_father_wavelet(3, 2, g)).abs().maxCoeff(), 1e-10);
}

TEST(Vaguelette, SingularSymbolRejected) {
  Grid g(1, 32);
  GridFunction<double> sym = GridFunction<double>::Ones(32, 1);
  sym(3) = 0;
  EXPECT_THROW(vaguelette(SmoothingOperator::custom(sym, 0, g), 2, 2, g), singular_operator);
}

TEST(Vaguelette, BiorthogonalityImprovesUnderRefinement) {
  for (int L : {1, 2})
    for (int M : {2, 3})
      for (int J : {1, 4}) {
        double prev = 0;
        for (Eigen::Index n = 256; n <= 1024; n *= 2) {
          Grid g(1, n);
          const double err = double(biorthogonality_error<long double>(SmoothingOperator::sobolev(L, g), M, J, g));
          if (prev > 0) EXPECT_GE(prev / err, 1.6) << "L=" << L << " M=" << M << " J=" << J << " n=" << n;
          prev = err;
        }
      }
}

// For a Sobolev symbol ||psi||_{L2} = ||phi_J||_{H^beta} exactly, and
// dilation gives ||phi_J||_{H^beta} <= 2^{(J - J0) beta} ||phi_J0||_{H^beta}
// once the father's support fits in the torus at scale J0.
TEST(Vaguelette, NormGrowsLikeTwoToTheJBeta) {
  Grid g(1, 2048);
  for (int L : {1, 2})
    for (int M : {2, 3, 6, 10}) {
      auto op = SmoothingOperator::sobolev(L, g);
      int J0 = 0;
      while ((1 << J0) < 2 * M - 1) ++J0;
      const double base = quad_norm(g, vaguelette(op, M, J0, g));
      for (int J = J0; J <= 6; ++J) {
        auto psi = vaguelette(op, M, J, g);
        const double norm = quad_norm(g, psi);
        EXPECT_NEAR(norm, sobolev_norm(g, sample_father_wavelet(M, J, g), op.beta) / op.a1, 1e-9 * norm);
        EXPECT_LE(norm, std::exp2((J - J0) * op.beta) * base * 1.1) << "L=" << L << " M=" << M << " J=" << J;
      }
    }
}

TEST(Noise, ZeroSigmaAndDeterminism) {
  Grid g(1, 64);
  CounterRng rng(3);
  auto f = random_grid(g, rng);
  CounterRng r1(5), r2(5), r3(6);
  EXPECT_TRUE((add_white_noise(f, 0.0, g, r1) == f).all());
  auto a = add_white_noise(f, 0.3, g, r1), b = add_white_noise(f, 0.3, g, r1);
  EXPECT_FALSE((a == b).all());  // second call continues the stream
  EXPECT_TRUE((add_white_noise(f, 0.3, g, r2) == a).all());
  CounterRng s1(5), s2(5);
  EXPECT_TRUE((add_white_noise(f, 0.3, g, s1) == add_white_noise(f, 0.3, g, s2)).all());
  EXPECT_FALSE((add_white_noise(f, 0.3, g, r3) == add_white_noise(f, 0.3, g, s1)).all());
  EXPECT_THROW(add_white_noise(f, -1.0, g, r3), std::invalid_argument);
}

TEST(Noise, InnerProductVarianceAndEnergy) {
  for (int d = 1; d <= 2; ++d) {
    Grid g(d, d == 1 ? 256 : 32);
    CounterRng rng(11);
    GridFunction<double> u = random_grid(g, rng);
    u /= quad_norm(g, u);
    const double sigma = 0.7;
    const int draws = 10000;
    double sum = 0, sum2 = 0, energy = 0;
    for (int t = 0; t < draws; ++t) {
      auto noise = add_white_noise(g.zeros(), sigma, g, rng);
      const double ip = quad_dot(g, noise, u);
      sum += ip;
      sum2 += ip * ip;
      energy += quad_dot(g, noise, noise);
    }
    const double var = sum2 / draws - (sum / draws) * (sum / draws);
    EXPECT_NEAR(var / (sigma * sigma), 1.0, 0.05);
    // h^d sum (sigma h^{-d/2} eps)^2 has mean sigma^2 n^d.
    EXPECT_NEAR(energy / draws / (sigma * sigma * double(g.total())), 1.0, 0.01);
  }
}

TEST(Prior, LevelVariancesMatchLaw) {
  Grid g(1, 256);
  for (auto law : {PriorParams::Law::DMinus2s, PriorParams::Law::Holder}) {
    PriorParams p;
    p.s = 0.75;
    p.L = 1.3;
    p.J_max = 6;
    p.M = 4;
    p.law = law;
    PriorSampler sampler(p, g);
    CounterRng rng(17);
    std::vector<double> acc(6, 0.0);
    std::vector<long> cnt(6, 0);
    for (int t = 0; t < 2000; ++t) {
      auto c = sampler.draw_coefficients(rng);
      for (int j = 0; j < 6; ++j) {
        acc[j] += c.details[j][0].values().square().sum();
        cnt[j] += c.details[j][0].size();
      }
    }
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(acc[j] / cnt[j] / p.level_variance(j, 1), 1.0, 0.08) << j;
  }
}

TEST(Prior, ZeroRadiusGivesZeroFunction) {
  Grid g(2, 32);
  PriorParams p;
  p.L = 0;
  p.J_max = 3;
  p.M = 2;
  CounterRng rng(1);
  EXPECT_EQ(sample_prior(p, g, rng).abs().maxCoeff(), 0.0);
}

TEST(Prior, SecondMomentMatchesClosedForm) {
  Grid g(1, 512);
  PriorParams p;
  p.s = 1;
  p.J_max = 5;
  p.M = 3;
  PriorSampler sampler(p, g);
  double sum = 0, sum2 = 0;
  const int draws = 3000;
  CounterRng rng2(6);
  for (int t = 0; t < draws; ++t) {
    auto f = sampler.draw(rng2);
    const double e = quad_dot(g, f, f);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / draws, se = std::sqrt((sum2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, p.second_moment(1), 3 * se + 0.01 * mean);
}

TEST(Prior, SmootherForLargerExponent) {
  Grid g(1, 512);
  auto h1 = [&](double s) {
    PriorParams p;
    p.s = s;
    p.J_max = 8;
    p.M = 6;
    p.law = PriorParams::Law::Holder;
    PriorSampler sampler(p, g);
    CounterRng rng(9);
    std::vector<double> v;
    for (int t = 0; t < 200; ++t) {
      auto f = sampler.draw(rng);
      GridFunction<double> df = (circular_shift(f, -1) - f) * double(g.n);
      v.push_back(quad_norm(g, df));
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  auto smooth = h1(3.0), rough = h1(0.5);
  // Quartiles of the H^1 seminorm distribution are ordered.
  for (std::size_t q : {50u, 100u, 150u}) EXPECT_LT(smooth[q], rough[q]);
}

TEST(TrainingSet, NoiselessIdentityAndReproducible) {
  Grid g(1, 128);
  PriorParams p;
  p.J_max = 4;
  p.M = 3;
  auto id = SmoothingOperator::identity(g);
  auto ts = make_training_set(id, p, 1, 0.0, g, CounterRng(3));
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_TRUE((ts.Y[0] == ts.f[0]).all());
  auto op = SmoothingOperator::sobolev(1, g);
  auto a = make_training_set(op, p, 4, 0.2, g, CounterRng(3)), b = make_training_set(op, p, 4, 0.2, g, CounterRng(3));
  for (int i = 0; i < 4; ++i) {
    EXPECT_TRUE((a.Y[i] == b.Y[i]).all());
    EXPECT_TRUE((a.f[i] == b.f[i]).all());
  }
  EXPECT_THROW(make_training_set(op, p, 0, 0.2, g, CounterRng(3)), std::invalid_argument);
}
