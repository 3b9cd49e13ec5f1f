#include "proxlab/differentiability.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace proxlab;

namespace {

ClosedSet origin() { return ClosedSet::finite({Vector::Zero(2)}); }

ClosedSet pentagon() {
  return ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({2, -0.5}), make_vector({3, 1}),
                                                 make_vector({1.5, 2.5}), make_vector({-0.5, 1.5})});
}

ClosedSet random_polytope(Rng& rng, Index dim) {
  const int m = 3 + static_cast<int>(rng.index(6));
  std::vector<Vector> v;
  for (int j = 0; j < m; ++j) v.push_back(rng.in_box(Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0)));
  return ClosedSet::polytope(v);
}

}  // namespace

TEST(Richardson, RemovesLeadingErrorTerm) {
  // q(h) = 2 + 3 h^2 + h^4: one order-2 step leaves an O(h^4) error.
  std::vector<double> h{1e-1, 1e-2, 1e-3}, q;
  for (double s : h) q.push_back(2 + 3 * s * s + s * s * s * s);
  const auto r = diff_detail::richardson(q, h, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.back(), 2.0, 1e-9);  // h_1^2 h_2^2 = 1e-10
  EXPECT_LT(std::abs(r.front() - 2.0), std::abs(q[1] - 2.0));
}

TEST(Gateaux, BallDistanceMatchesClosedForm) {
  // d_K(x) = |x| - 1 for the unit disk; derivative along z is <x/|x|, z>.
  const auto disk = ClosedSet::ball(Vector::Zero(2), 1.0, Norm::l2());
  const Vector x = make_vector({3, 4});
  const auto e = gateaux_derivative_dK(x, make_vector({1, 0}), disk, Norm::l2());
  EXPECT_NEAR(e.extrapolated, 0.6, 1e-8);
  EXPECT_FALSE(e.one_sided_mismatch);
  const auto e2 = gateaux_derivative_dK(x, make_vector({2, 0}), disk, Norm::l2());
  EXPECT_NEAR(e2.extrapolated, 1.2, 1e-8);
  EXPECT_NEAR(e2.direction_scale, 2.0, 1e-15);
  EXPECT_NEAR(Norm::l2()(e2.direction), 1.0, 1e-15);
}

TEST(Gateaux, L1KinkShowsOneSidedMismatch) {
  // d_{0}(x) = |x|_1; at (1,0) along (0,1) forward slope 1, backward slope -1.
  const auto e = gateaux_derivative_dK(make_vector({1, 0}), make_vector({0, 1}), origin(), Norm::l1());
  EXPECT_TRUE(e.one_sided_mismatch);
  EXPECT_NEAR(e.forward_limit, 1.0, 1e-8);
  EXPECT_NEAR(e.backward_limit, -1.0, 1e-8);
}

TEST(Gateaux, RejectsBadInputs) {
  const auto disk = ClosedSet::ball(Vector::Zero(2), 1.0, Norm::l2());
  EXPECT_THROW(gateaux_derivative_dK(make_vector({3, 4}), Vector::Zero(2), disk, Norm::l2()), InvalidArgument);
  EXPECT_THROW(gateaux_derivative_dK(make_vector({0.5, 0}), make_vector({1, 0}), disk, Norm::l2()), PointInSet);
  EXPECT_THROW(gateaux_derivative_dK(make_vector({3, 4}), make_vector({1, 0}), disk, Norm::l2(), {1e-2, 1e-12}),
               InvalidArgument);
  EXPECT_THROW(gateaux_derivative_dK(make_vector({3, 4}), make_vector({1, 0}), disk, Norm::l2(), {1e-3, 1e-2}),
               InvalidArgument);
}

TEST(Gradient, EuclideanPolytopeGradientIsUnitResidual) {
  const auto k = pentagon();
  const Vector x = make_vector({4, 3});
  const Vector p = distance(x, k, Norm::l2()).minimizers.front();
  const Vector expected = (x - p) / (x - p).norm();
  const auto g = dK_gradient(x, k, Norm::l2());
  EXPECT_LT((g.gradient.coords - expected).norm(), 1e-7);
}

TEST(Gradient, NonDifferentiablePointsThrowWithDirection) {
  try {
    dK_gradient(make_vector({1, 0}), origin(), Norm::l1());
    FAIL() << "expected NonDifferentiablePoint";
  } catch (const NonDifferentiablePoint& e) {
    EXPECT_NEAR(std::abs(e.direction()(1)), 1.0, 1e-12);
  }
  EXPECT_THROW(dK_gradient(Vector::Zero(2), ClosedSet::circle(Vector::Zero(2), 1.0), Norm::l2()), NonDifferentiablePoint);
}

TEST(Frechet, UniformOnEuclideanPolytope) {
  const auto v = frechet_check_dK(make_vector({4, 3}), pentagon(), Norm::l2(), {1e-1, 1e-2, 1e-3}, 200, 3);
  EXPECT_TRUE(v.uniform);
  EXPECT_EQ(v.directions, 200);
  for (std::size_t i = 0; i < v.epsilon_grid.size(); ++i) {
    EXPECT_GT(v.delta[i], 0.0);
    EXPECT_LE(v.worst_residual[i], v.epsilon_grid[i]);
  }
}

TEST(Frechet, SupFlatFaceIsDifferentiable) {
  // Near (0,1) the sup distance to the segment [-2,2]x{0} is just the second coordinate.
  const auto seg = ClosedSet::segment(make_vector({-2, 0}), make_vector({2, 0}));
  const auto v = frechet_check_dK(make_vector({0, 1}), seg, Norm::sup(), {1e-1, 1e-2, 1e-3}, 200, 3);
  EXPECT_TRUE(v.uniform);
  EXPECT_NEAR(v.gradient.coords(0), 0.0, 1e-7);
  EXPECT_NEAR(v.gradient.coords(1), 1.0, 1e-7);
}

TEST(Frechet, KinkThrows) {
  EXPECT_THROW(frechet_check_dK(make_vector({1, 0}), origin(), Norm::l1()), NonDifferentiablePoint);
  EXPECT_EQ(default_direction_budget(3), 200);
  EXPECT_EQ(default_direction_budget(4), 1000);
}

TEST(UnitResidual, ResidualSmallOnRandomPolytopes) {
  Rng rng(101);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index dim = trial % 2 == 0 ? 2 : 3;
    const auto k = random_polytope(rng, dim);
    Vector x;
    do {
      x = rng.in_box(Vector::Constant(dim, -3), Vector::Constant(dim, 3));
    } while (contains(k, x, 1e-3));
    const auto r = lemma1_check(x, k, Norm::l2());
    ASSERT_TRUE(r.differentiable);
    for (double res : r.residuals) EXPECT_LT(res, 1e-5);
    EXPECT_TRUE(r.pass);
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(UnitResidual, NonSmoothNormWithSmoothDistance) {
  // l3 distance to a ball in l3: d = |x - c|_3 - r, gradient pairs to 1 with the unit residual.
  const auto b = ClosedSet::ball(make_vector({1, 1}), 0.5, Norm::lp(3));
  const auto r = lemma1_check(make_vector({3, -1}), b, Norm::lp(3));
  ASSERT_TRUE(r.differentiable);
  EXPECT_TRUE(r.pass);
}

TEST(UnitResidual, NonDifferentiablePointIsReported) {
  const auto r = lemma1_check(Vector::Zero(2), ClosedSet::circle(Vector::Zero(2), 1.0), Norm::l2());
  EXPECT_FALSE(r.differentiable);
  EXPECT_FALSE(r.note.empty());
}

TEST(SequenceConvergence, EuclideanPolytopeSequencesShareALimit) {
  const auto rep = theorem2_convergence_experiment(
      make_vector({3.5, 2.5}), pentagon(), Norm::l2(),
      {SequenceStrategy::SolverIterates, SequenceStrategy::VertexSweep, SequenceStrategy::RandomizedDescent});
  EXPECT_TRUE(rep.frechet_uniform);
  EXPECT_TRUE(rep.exposes);
  EXPECT_TRUE(rep.hypotheses_met);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.limit_spread, 1e-4);
  for (const auto& s : rep.strategies) EXPECT_LT((s.limit - rep.minimizer).norm(), 1e-4) << s.strategy;
}

TEST(SequenceConvergence, SupFlatFaceBreaksExposureAndConvergence) {
  const auto seg = ClosedSet::segment(make_vector({-2, 0}), make_vector({2, 0}));
  const auto rep = theorem2_convergence_experiment(
      make_vector({0, 1}), seg, Norm::sup(),
      {SequenceStrategy::SolverIterates, SequenceStrategy::VertexSweep, SequenceStrategy::RandomizedDescent});
  EXPECT_TRUE(rep.exposure_ran);
  EXPECT_FALSE(rep.exposes);
  EXPECT_FALSE(rep.hypotheses_met);
  double worst_tail = 0.0;
  for (const auto& s : rep.strategies) worst_tail = std::max(worst_tail, s.tail_diameter);
  EXPECT_GE(worst_tail, 1.9);
}
