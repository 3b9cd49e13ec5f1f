#include "proxlab/norm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace proxlab;

namespace {

std::vector<Norm> sample_norms(Index dim) {
  Matrix hex(3, 2);
  hex << 1, 0, 0.5, 1, -0.5, 1;
  std::vector<Norm> out{Norm::l1(), Norm::lp(1.5), Norm::l2(), Norm::lp(3), Norm::lp(4), Norm::sup()};
  if (dim == 2) {
    out.push_back(Norm::weighted_lp(2.0, make_vector({1.0, 4.0})));
    out.push_back(Norm::weighted_lp(1.0, make_vector({0.5, 2.0})));
    out.push_back(Norm::polyhedral(hex));
  }
  return out;
}

// Independent evaluation of sum |v_i|^p)^(1/p) without rescaling.
double naive_lp(const Vector& v, double p) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

TEST(Norm, AxiomsOnRandomSamples) {
  for (Index dim : {2, 3}) {
    Rng rng(derive_seed(41, static_cast<std::uint64_t>(dim)));
    for (const auto& n : sample_norms(dim)) {
      for (int i = 0; i < 10000; ++i) {
        const Vector x = rng.gaussian(dim), y = rng.gaussian(dim);
        const double a = rng.uniform(-3, 3);
        ASSERT_GT(n(x), 0.0) << n.describe();
        ASSERT_NEAR(n(a * x), std::abs(a) * n(x), 1e-12 * (1 + n(x))) << n.describe();
        ASSERT_LE(n(x + y), n(x) + n(y) + 1e-12) << n.describe();
      }
      EXPECT_EQ(n(Vector::Zero(dim)), 0.0);
    }
  }
}

TEST(Norm, LpMatchesNaiveFormula) {
  Rng rng(7);
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 7.5}) {
    const Norm n = Norm::lp(p);
    for (int i = 0; i < 200; ++i) {
      const Vector v = rng.gaussian(4);
      EXPECT_NEAR(n(v), naive_lp(v, p), 1e-12 * naive_lp(v, p));
    }
  }
  EXPECT_DOUBLE_EQ(Norm::sup()(make_vector({-3, 2, 1})), 3.0);
}

TEST(Norm, HugeAndTinyEntriesDoNotOverflow) {
  const Norm n = Norm::lp(4);
  EXPECT_NEAR(n(make_vector({1e200, 1e200})) / 1e200, std::pow(2.0, 0.25), 1e-12);
  EXPECT_NEAR(n(make_vector({1e-200, 0})) / 1e-200, 1.0, 1e-12);
}

TEST(Norm, RejectsInvalidParameters) {
  EXPECT_THROW(Norm::lp(0.5), InvalidArgument);
  EXPECT_THROW(Norm::weighted_lp(2.0, make_vector({1.0, -1.0})), InvalidArgument);
  Matrix rank1(2, 2);
  rank1 << 1, 1, 2, 2;
  EXPECT_THROW(Norm::polyhedral(rank1), InvalidArgument);
  EXPECT_THROW(Norm::weighted_lp(2.0, make_vector({1.0, 2.0}))(make_vector({1, 2, 3})), DimensionMismatch);
}

TEST(Norm, L4GradientAtOnesMatchesFiniteDifferences) {
  const Norm n = Norm::lp(4);
  const Vector x = make_vector({1.0, 1.0});
  const auto g = n.gradient(x);
  const double expected = std::pow(2.0, -0.75);
  for (Index i = 0; i < 2; ++i) {
    const double h = 1e-5;
    Vector e = Vector::Zero(2);
    e(i) = h;
    const double fd = (naive_lp(x + e, 4) - naive_lp(x - e, 4)) / (2 * h);
    EXPECT_NEAR(fd, expected, 1e-9);
    EXPECT_NEAR(g.coords(i), expected, 1e-12);
  }
}

TEST(Norm, GradientErrorShrinksQuadraticallyUnderCentralDifferences) {
  // If the analytic gradient is exact, central differences approach it at O(h^2).
  const Norm n = Norm::lp(3);
  const Vector x = make_vector({0.7, -1.3, 0.4});
  const Vector d = make_vector({0.3, 0.5, -0.8});
  const double exact = n.gradient(x).pair(d);
  std::vector<double> hs{1e-1, 5e-2, 2.5e-2, 1.25e-2}, errs;
  for (double h : hs) errs.push_back(std::abs((n(x + h * d) - n(x - h * d)) / (2 * h) - exact));
  const double slope = (std::log(errs.front()) - std::log(errs.back())) / (std::log(hs.front()) - std::log(hs.back()));
  EXPECT_GE(slope, 1.9);
}

TEST(Norm, GradientIsDualUnitAndNormingForSmoothNorms) {
  Rng rng(99);
  for (const auto& n : {Norm::lp(1.5), Norm::l2(), Norm::lp(3), Norm::weighted_lp(2.5, make_vector({1.0, 3.0, 0.5}))}) {
    for (int i = 0; i < 500; ++i) {
      const Vector v = rng.gaussian(3);
      const auto g = n.gradient(v);
      EXPECT_NEAR(n.dual(g), 1.0, 1e-9) << n.describe();
      EXPECT_NEAR(g.pair(v), n(v), 1e-9 * (1 + n(v))) << n.describe();
    }
  }
}

TEST(Norm, KinksAreReported) {
  EXPECT_THROW(Norm::l1().gradient(make_vector({1.0, 0.0})), NonsmoothPoint);
  EXPECT_THROW(Norm::sup().gradient(make_vector({1.0, -1.0})), NonsmoothPoint);
  EXPECT_THROW(Norm::l2().gradient(Vector::Zero(2)), ZeroVector);
  const auto g = Norm::sup().gradient(make_vector({2.0, -1.0}));
  EXPECT_DOUBLE_EQ(g.coords(0), 1.0);
  EXPECT_DOUBLE_EQ(g.coords(1), 0.0);
}

TEST(Norm, SubgradientSatisfiesSubgradientInequality) {
  Rng rng(5);
  const Vector kinked = make_vector({1.0, 0.0, -1.0});
  for (const auto& n : {Norm::l1(), Norm::sup(), Norm::l2()}) {
    const auto g = n.subgradient(kinked);
    EXPECT_LE(n.dual(g), 1.0 + 1e-12);
    EXPECT_NEAR(g.pair(kinked), n(kinked), 1e-12);
    for (int i = 0; i < 1000; ++i) {
      const Vector y = rng.gaussian(3);
      EXPECT_GE(n(y), n(kinked) + g.pair(y - kinked) - 1e-12);
    }
  }
}

TEST(Norm, OneSidedDirectionalDerivativeAtL1Kink) {
  const Norm n = Norm::l1();
  const Vector x = make_vector({1.0, 0.0});
  EXPECT_NEAR(n.directional_derivative(x, make_vector({0, 1})), 1.0, 1e-12);
  EXPECT_NEAR(n.directional_derivative(x, make_vector({0, -1})), 1.0, 1e-12);
  EXPECT_NEAR(n.directional_derivative(x, make_vector({1, 0})), 1.0, 1e-12);
  // Independent one-sided difference quotient.
  const Vector d = make_vector({-0.3, 0.7});
  const double t = 1e-7;
  EXPECT_NEAR(n.directional_derivative(x, d), (n(x + t * d) - n(x)) / t, 1e-6);
}

TEST(Norm, DualNormsMatchConjugateExponents) {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const DualVector f(rng.gaussian(3));
    EXPECT_NEAR(Norm::l1().dual(f), f.coords.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(Norm::sup().dual(f), f.coords.cwiseAbs().sum(), 1e-12);
    EXPECT_NEAR(Norm::lp(3).dual(f), naive_lp(f.coords, 1.5), 1e-10);
    EXPECT_NEAR(Norm::l2().dual(f), f.coords.norm(), 1e-12);
  }
}

TEST(Norm, DualMaximizerAttainsDualNormAndBeatsSamples) {
  Rng rng(31);
  Matrix hex(3, 2);
  hex << 1, 0, 0.5, 1, -0.5, 1;
  for (const auto& n : {Norm::l1(), Norm::lp(1.5), Norm::lp(4), Norm::sup(), Norm::polyhedral(hex),
                        Norm::weighted_lp(3.0, make_vector({2.0, 0.5}))}) {
    for (int i = 0; i < 50; ++i) {
      const DualVector f(rng.gaussian(2));
      const Vector z = n.dual_maximizer(f);
      EXPECT_NEAR(n(z), 1.0, 1e-9) << n.describe();
      EXPECT_NEAR(f.pair(z), n.dual(f), 1e-8 * (1 + n.dual(f))) << n.describe();
      for (int j = 0; j < 200; ++j) {
        const Vector u = rng.gaussian(2);
        EXPECT_LE(f.pair(u / n(u)), n.dual(f) + 1e-9) << n.describe();
      }
    }
  }
}

TEST(Norm, PolyhedralWithCoordinateFunctionalsIsSup) {
  Matrix g(2, 2);
  g << 1, 0, 0, 1;
  const Norm p = Norm::polyhedral(g);
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vector v = rng.gaussian(2);
    EXPECT_NEAR(p(v), Norm::sup()(v), 1e-12);
  }
}

TEST(Norm, SmoothnessFlags) {
  EXPECT_TRUE(Norm::l2().smooth_away_from_zero());
  EXPECT_TRUE(Norm::l2().is_euclidean());
  EXPECT_FALSE(Norm::l1().strictly_convex());
  EXPECT_TRUE(Norm::sup().is_polyhedral());
  EXPECT_TRUE(Norm::lp(3) == Norm::lp(3));
  EXPECT_FALSE(Norm::lp(3) == Norm::lp(4));
}
