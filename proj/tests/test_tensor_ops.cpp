#include "sunet/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sunet;

namespace {

Tensor vec(Eigen::Index lo, std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return Tensor::from_vector(lo, x);
}

Tensor random_tensor(std::mt19937_64& rng, int d, Eigen::Index lo0, Eigen::Index n0, Eigen::Index lo1 = 0,
                     Eigen::Index n1 = 1) {
  std::normal_distribution<double> N;
  auto t = Tensor::zeros(d, {lo0, lo1}, {lo0 + n0 - 1, lo1 + n1 - 1});
  for (Eigen::Index i = 0; i < t.values().size(); ++i) t.values().data()[i] = N(rng);
  return t;
}

double dot(const Tensor& x, const Tensor& y) {
  double s = 0;
  for (Eigen::Index j = x.lo(1); j <= x.hi(1); ++j)
    for (Eigen::Index i = x.lo(0); i <= x.hi(0); ++i) s += x(i, j) * y.get(i, j);
  return s;
}

}  // namespace

TEST(DownConv, DeltaIsDownsampling) {
  auto out = down_conv(vec(0, {1.0}), vec(0, {5, 6, 7, 8}));
  ASSERT_EQ(out.lo(0), 0);
  ASSERT_EQ(out.hi(0), 1);
  EXPECT_EQ(out(0), 5);
  EXPECT_EQ(out(1), 7);
}

TEST(DownConv, HaarHandEvaluation) {
  const double r = 1 / std::sqrt(2.0);
  auto out = down_conv(vec(0, {r, r}), vec(0, {1, 2, 3, 4}));
  ASSERT_EQ(out.lo(0), 0);
  ASSERT_EQ(out.hi(0), 2);
  EXPECT_NEAR(out(0), 1 * r, 1e-15);
  EXPECT_NEAR(out(1), 5 * r, 1e-15);
  EXPECT_NEAR(out(2), 4 * r, 1e-15);
}

TEST(DownConv, ZeroInputGivesZero) {
  std::mt19937_64 rng(1);
  auto out = down_conv(random_tensor(rng, 1, -2, 5), Tensor::zeros1(0, 9));
  EXPECT_EQ(out.values().abs().maxCoeff(), 0.0);
}

TEST(DownConv, DimensionMismatchThrows) {
  EXPECT_THROW(down_conv(Tensor::zeros1(0, 1), Tensor::zeros2({0, 0}, {1, 1})), std::invalid_argument);
  EXPECT_THROW(up_conv(Tensor::zeros1(0, 1), Tensor::zeros2({0, 0}, {1, 1})), std::invalid_argument);
}

TEST(UpConv, DeltaIsZeroInsertion) {
  auto out = up_conv(vec(0, {1.0}), vec(0, {3, 4}));
  ASSERT_EQ(out.lo(0), 0);
  ASSERT_EQ(out.hi(0), 2);
  EXPECT_EQ(out(0), 3);
  EXPECT_EQ(out(1), 0);
  EXPECT_EQ(out(2), 4);
}

// Brute force over every (k, l) pair with (k + l) / 2 integral.
TEST(UpConv, HaarSingleCoefficient) {
  const double r = 1 / std::sqrt(2.0), c = 2.5;
  auto out = up_conv(vec(0, {r, r}), vec(0, {c}));
  ASSERT_EQ(out.lo(0), -1);
  ASSERT_EQ(out.hi(0), 0);
  EXPECT_NEAR(out(-1), c * r, 1e-15);
  EXPECT_NEAR(out(0), c * r, 1e-15);
}

TEST(UpConv, MatchesBruteForceEnumeration) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_tensor(rng, 1, -3 + trial % 4, 1 + trial % 5);
    auto a = random_tensor(rng, 1, -2 + trial % 3, 1 + trial % 6);
    auto out = up_conv(g, a);
    for (Eigen::Index k = out.lo(0) - 3; k <= out.hi(0) + 3; ++k) {
      double s = 0;
      for (Eigen::Index l = g.lo(0); l <= g.hi(0); ++l)
        if ((k + l) % 2 == 0) s += g(l) * a.get((k + l) / 2);
      EXPECT_NEAR(out.get(k), s, 1e-13);
    }
  }
}

TEST(Convolutions, AreLinearInBothArguments) {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 2; ++d) {
    const Eigen::Index n1 = d == 2 ? 6 : 1, f1 = d == 2 ? 3 : 1;
    auto g1 = random_tensor(rng, d, -1, 4, 0, f1), g2 = random_tensor(rng, d, -1, 4, 0, f1);
    auto a1 = random_tensor(rng, d, 0, 8, 0, n1), a2 = random_tensor(rng, d, 0, 8, 0, n1);
    const double p = 0.7, q = -1.3;
    auto ga = Tensor::from_array(d, g1.lo(), p * g1.values() + q * g2.values());
    auto aa = Tensor::from_array(d, a1.lo(), p * a1.values() + q * a2.values());
    for (Boundary b : {Boundary::Paper, Boundary::Periodic}) {
      auto lhs = down_conv(ga, a1, b).values();
      auto rhs = (p * down_conv(g1, a1, b).values() + q * down_conv(g2, a1, b).values()).eval();
      EXPECT_LE((lhs - rhs).abs().maxCoeff(), 1e-12);
      lhs = down_conv(g1, aa, b).values();
      rhs = p * down_conv(g1, a1, b).values() + q * down_conv(g1, a2, b).values();
      EXPECT_LE((lhs - rhs).abs().maxCoeff(), 1e-12);
      lhs = up_conv(g1, aa, b).values();
      rhs = p * up_conv(g1, a1, b).values() + q * up_conv(g1, a2, b).values();
      EXPECT_LE((lhs - rhs).abs().maxCoeff(), 1e-12);
      lhs = up_conv(ga, a1, b).values();
      rhs = p * up_conv(g1, a1, b).values() + q * up_conv(g2, a1, b).values();
      EXPECT_LE((lhs - rhs).abs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Convolutions, DeltaUpAfterDownKeepsEvenEntries) {
  auto a = vec(0, {1, 2, 3, 4, 5, 6, 7});
  auto back = up_conv(vec(0, {1.0}), down_conv(vec(0, {1.0}), a));
  for (Eigen::Index k = 0; k <= 6; ++k) EXPECT_EQ(back.get(k), k % 2 == 0 ? a(k) : 0.0);
}

// <down(g, a), b> = <a, up(g, b)> in both boundary modes.
TEST(Convolutions, UpIsAdjointOfDown) {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 2; ++d)
    for (Boundary mode : {Boundary::Paper, Boundary::Periodic}) {
      auto g = random_tensor(rng, d, mode == Boundary::Paper ? -3 : -3, 4, -3, d == 2 ? 4 : 1);
      auto a = random_tensor(rng, d, 0, 16, 0, d == 2 ? 16 : 1);
      auto da = down_conv(g, a, mode);
      auto b = random_tensor(rng, d, da.lo(0), da.extent(0), da.lo(1), da.extent(1));
      auto ub = up_conv(g, b, mode);
      EXPECT_NEAR(dot(da, b), dot(a, ub), 1e-10);
    }
}

TEST(Convolutions, FilterGradientsMatchLinearity) {
  std::mt19937_64 rng(5);
  for (int d = 1; d <= 2; ++d)
    for (Boundary mode : {Boundary::Paper, Boundary::Periodic}) {
      auto g = random_tensor(rng, d, -2, 3, -2, d == 2 ? 3 : 1);
      auto a = random_tensor(rng, d, 0, 8, 0, d == 2 ? 8 : 1);
      auto w = down_conv(g, a, mode);
      auto gw = random_tensor(rng, d, w.lo(0), w.extent(0), w.lo(1), w.extent(1));
      auto grad = down_conv_filter_grad(gw, a, g, mode);
      auto u = up_conv(g, a, mode);
      auto gu = random_tensor(rng, d, u.lo(0), u.extent(0), u.lo(1), u.extent(1));
      auto grad_up = up_conv_filter_grad(gu, a, g, mode);
      for (Eigen::Index j = g.lo(1); j <= g.hi(1); ++j)
        for (Eigen::Index i = g.lo(0); i <= g.hi(0); ++i) {
          auto e = Tensor::zeros(d, g.lo(), g.hi());
          e(i, j) = 1.0;
          EXPECT_NEAR(grad(i, j), dot(down_conv(e, a, mode), gw), 1e-12);
          EXPECT_NEAR(grad_up(i, j), dot(up_conv(e, a, mode), gu), 1e-12);
        }
    }
}

TEST(Convolutions, PeriodicRequiresZeroBasedEvenInput) {
  EXPECT_THROW(down_conv(vec(0, {1.0}), vec(1, {1, 2, 3, 4}), Boundary::Periodic), std::invalid_argument);
  EXPECT_THROW(down_conv(vec(0, {1.0}), vec(0, {1, 2, 3}), Boundary::Periodic), std::invalid_argument);
}

// |gamma *down A| <= |gamma| |A| is provable when every input entry meets at
// most one tap per output, i.e. at most two taps per axis. Longer filters only
// obey it with the overlap factor sqrt(ceil(taps/2)) per axis.
TEST(Convolutions, CauchySchwarzChainForTwoTapFilters) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 500; ++t) {
    const int d = 1 + t % 2;
    auto g = random_tensor(rng, d, -1, 2, 0, d == 2 ? 2 : 1);
    auto a = random_tensor(rng, d, 0, 16, 0, d == 2 ? 16 : 1);
    for (Boundary b : {Boundary::Paper, Boundary::Periodic})
      EXPECT_LE(l2_norm(down_conv(g, a, b)), l2_norm(g) * l2_norm(a) * (1 + 1e-14));
  }
}

TEST(Convolutions, OverlapFactorBoundForLongFilters) {
  std::mt19937_64 rng(18);
  int plain = 0;
  for (int t = 0; t < 500; ++t) {
    const Eigen::Index taps = 3 + t % 8;
    auto g = random_tensor(rng, 1, -2, taps);
    auto a = random_tensor(rng, 1, 0, 32);
    const double lhs = l2_norm(down_conv(g, a, Boundary::Periodic)), base = l2_norm(g) * l2_norm(a);
    EXPECT_LE(lhs, std::sqrt(double((taps + 1) / 2)) * base * (1 + 1e-14));
    if (lhs <= base) ++plain;
  }
  // The unscaled chain still holds for the overwhelming majority of white inputs.
  EXPECT_GE(plain, 490);
}

TEST(Convolutions, CauchySchwarzChainFailsAdversarially) {
  auto g = vec(0, {0.5, 0.5, 0.5, 0.5});
  auto a = Tensor::from_vector(0, Eigen::VectorXd::Ones(64));
  const double ratio = l2_norm(down_conv(g, a, Boundary::Periodic)) / (l2_norm(g) * l2_norm(a));
  EXPECT_NEAR(ratio, std::sqrt(2.0), 1e-12);
}

TEST(TensorProduct, Basics) {
  auto t = tensor_product(vec(0, {1, 0}), vec(0, {0, 1}));
  ASSERT_EQ(t.dim(), 2);
  EXPECT_EQ(t(0, 1), 1);
  EXPECT_EQ(t.values().sum(), 1);
  EXPECT_EQ(tensor_product(vec(0, {2}), vec(0, {3}))(0, 0), 6);
  std::mt19937_64 rng(2);
  auto u = random_tensor(rng, 1, -1, 5), v = random_tensor(rng, 1, 2, 3);
  EXPECT_NEAR(l2_norm(tensor_product(u, v)), l2_norm(u) * l2_norm(v), 1e-12);
  EXPECT_THROW(tensor_product(t, u), std::invalid_argument);
}

TEST(L2Norm, Values) {
  EXPECT_EQ(l2_norm(Tensor::zeros1(0, 3)), 0);
  EXPECT_EQ(l2_norm(vec(0, {3})), 3);
  EXPECT_EQ(l2_norm(vec(0, {3, 4})), 5);
}

TEST(Add, CoversUnionOfRanges) {
  auto s = add(vec(-1, {1, 2}), vec(1, {5}));
  EXPECT_EQ(s.lo(0), -1);
  EXPECT_EQ(s.hi(0), 1);
  EXPECT_EQ(s(-1), 1);
  EXPECT_EQ(s(0), 2);
  EXPECT_EQ(s(1), 5);
}
