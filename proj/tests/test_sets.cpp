#include "proxlab/sets.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace proxlab;

namespace {

ClosedSet unit_square() {
  return ClosedSet::polytope(std::vector<Vector>{make_vector({-1, -1}), make_vector({1, -1}), make_vector({1, 1}),
                                                 make_vector({-1, 1})});
}

ClosedSet disk_as_sublevel() {
  return ClosedSet::sublevel([](const Vector& v) { return v.squaredNorm(); }, 1.0, make_vector({-2, -2}),
                             make_vector({2, 2}));
}

}  // namespace

TEST(Contains, BasicMembership) {
  EXPECT_TRUE(contains(ClosedSet::ball(Vector::Zero(2), 1.0, Norm::l2()), make_vector({0.5, 0}), 0.0));
  EXPECT_FALSE(contains(ClosedSet::segment(make_vector({0, 0}), make_vector({1, 0})), make_vector({2, 0}), 0.0));
  EXPECT_TRUE(contains(ClosedSet::truncated_l1_hull(3), make_vector({0, 1.5, 0}), 0.0));
  EXPECT_FALSE(contains(ClosedSet::truncated_l1_hull(3), make_vector({0, 1.4, 0}), 0.0));
  EXPECT_TRUE(contains(unit_square(), make_vector({0.3, -0.9}), 0.0));
  EXPECT_TRUE(contains(unit_square(), make_vector({1.05, 0}), 0.051));
  EXPECT_FALSE(contains(unit_square(), make_vector({1.05, 0}), 0.049));
}

TEST(Contains, SublevelCurveAndUnion) {
  const auto disk = disk_as_sublevel();
  EXPECT_TRUE(contains(disk, make_vector({0.6, 0.6}), 0.0));
  EXPECT_FALSE(contains(disk, make_vector({0.8, 0.8}), 0.0));
  EXPECT_TRUE(contains(disk, make_vector({1.001, 0}), 2e-3));
  const auto circle = ClosedSet::circle(Vector::Zero(2), 1.0);
  EXPECT_TRUE(contains(circle, make_vector({std::cos(0.3), std::sin(0.3)}), 1e-9));
  EXPECT_FALSE(contains(circle, make_vector({0, 0}), 0.5));
  const auto two = ClosedSet::union_of({ClosedSet::finite({make_vector({-1, 0})}), circle});
  EXPECT_TRUE(contains(two, make_vector({-1, 0}), 0.0));
  EXPECT_THROW(contains(two, make_vector({1, 0, 0}), 0.0), DimensionMismatch);
}

TEST(Construction, InvalidInputsThrow) {
  EXPECT_THROW(ClosedSet::finite({}), InvalidArgument);
  EXPECT_THROW(ClosedSet::ball(Vector::Zero(2), 0.0, Norm::l2()), InvalidArgument);
  EXPECT_THROW(ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({1, 0, 0})}),
               DimensionMismatch);
  EXPECT_THROW(ClosedSet::sublevel([](const Vector& v) { return -v.squaredNorm(); }, 0.0, make_vector({-1, -1}),
                                   make_vector({1, 1})),
               InvalidArgument);
  EXPECT_THROW(ClosedSet::sublevel([](const Vector& v) { return v.squaredNorm(); }, -1.0, make_vector({-1, -1}),
                                   make_vector({1, 1})),
               InvalidArgument);
  EXPECT_THROW(ClosedSet::curve([](double t) { return make_vector({t < 0.5 ? 0.0 : 5.0, t}); }, 0.0, 1.0, false),
               InvalidArgument);
  EXPECT_THROW(ClosedSet::curve([](double t) { return make_vector({t, 0}); }, 0.0, 1.0, true), InvalidArgument);
  EXPECT_THROW(ClosedSet::truncated_l1_hull(0), InvalidArgument);
}

TEST(Construction, KindsAndConvexity) {
  EXPECT_EQ(unit_square().kind_name(), "polytope");
  EXPECT_TRUE(unit_square().convex());
  EXPECT_FALSE(ClosedSet::circle(Vector::Zero(2), 1).convex());
  EXPECT_FALSE(ClosedSet::finite({make_vector({0, 0}), make_vector({1, 0})}).convex());
  EXPECT_TRUE(ClosedSet::finite({make_vector({0, 0})}).convex());
  EXPECT_TRUE(disk_as_sublevel().convex());
  EXPECT_EQ(ClosedSet::truncated_l1_hull(5).dim(), 5);
}

TEST(TruncatedHull, VertexNormsDecreaseTowardOne) {
  const auto k = ClosedSet::truncated_l1_hull(64);
  const auto* p = k.as<Polytope>();
  ASSERT_NE(p, nullptr);
  double prev = 3.0;
  for (Index n = 0; n < 64; ++n) {
    const double norm = p->vertices.col(n).lpNorm<1>();
    EXPECT_DOUBLE_EQ(norm, static_cast<double>(n + 2) / static_cast<double>(n + 1));
    EXPECT_LT(norm, prev);
    EXPECT_GT(norm, 1.0);
    prev = norm;
  }
}

TEST(LinearMinimization, SmallExamples) {
  const auto tri = ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({1, 0}), make_vector({0, 1})});
  EXPECT_EQ(linear_minimization_oracle(tri, DualVector(make_vector({1, 1}))), make_vector({0, 0}));
  // Tie between (1,0) and (0,1): lowest index wins.
  EXPECT_EQ(linear_minimization_oracle(tri, DualVector(make_vector({-1, -1}))), make_vector({1, 0}));
  const auto ball = ClosedSet::ball(Vector::Zero(2), 1.0, Norm::l2());
  EXPECT_TRUE(linear_minimization_oracle(ball, DualVector(make_vector({1, 0}))).isApprox(make_vector({-1, 0})));
}

TEST(LinearMinimization, TruncatedHullAgainstBruteForce) {
  const auto k = ClosedSet::truncated_l1_hull(3);
  const DualVector f(make_vector({1, 1, 1}));
  // Brute force over the vertices: <f, e_n> = (n+1)/n.
  Index best = 0;
  double bv = 1e300;
  for (Index n = 1; n <= 3; ++n) {
    const double v = static_cast<double>(n + 1) / static_cast<double>(n);
    if (v < bv) {
      bv = v;
      best = n;
    }
  }
  EXPECT_EQ(best, 3);
  const Vector y = linear_minimization_oracle(k, f);
  EXPECT_TRUE(y.isApprox(make_vector({0, 0, 4.0 / 3.0})));
}

TEST(LinearMinimization, NeverBeatenBySampledMembers) {
  Rng rng(77);
  Matrix hex(3, 2);
  hex << 1, 0, 0.5, 1, -0.5, 1;
  const std::vector<ClosedSet> sets{unit_square(), ClosedSet::truncated_l1_hull(6),
                                    ClosedSet::ball(make_vector({1, 2}), 0.7, Norm::lp(3)),
                                    ClosedSet::ball(make_vector({0, 0}), 1.0, Norm::polyhedral(hex)),
                                    ClosedSet::ball(make_vector({0, 0, 0}), 2.0, Norm::l1())};
  for (const auto& k : sets) {
    const auto members = sample_members(k, 500, 9);
    for (int i = 0; i < 100; ++i) {
      const DualVector f(rng.gaussian(k.dim()));
      const double best = f.pair(linear_minimization_oracle(k, f));
      for (const auto& m : members) ASSERT_GE(f.pair(m), best - 1e-9) << k.kind_name();
    }
  }
}

TEST(LinearMinimization, UnsupportedVariantsThrow) {
  EXPECT_THROW(linear_minimization_oracle(ClosedSet::circle(Vector::Zero(2), 1), DualVector(make_vector({1, 0}))),
               Unsupported);
  EXPECT_THROW(linear_minimization_oracle(disk_as_sublevel(), DualVector(make_vector({1, 0}))), Unsupported);
}

TEST(BoundarySampling, CircleSquareAndFiniteSets) {
  const auto circle = ClosedSet::circle(Vector::Zero(2), 1.0);
  const auto c = sample_boundary(circle, 4, 5);
  ASSERT_EQ(c.size(), 4u);
  for (const auto& p : c) EXPECT_NEAR(p.norm(), 1.0, 1e-9);

  const auto sq = sample_boundary(unit_square(), 200, 5);
  ASSERT_EQ(sq.size(), 200u);
  for (const auto& p : sq) {
    EXPECT_TRUE(contains(unit_square(), p, 1e-9));
    EXPECT_NEAR(p.cwiseAbs().maxCoeff(), 1.0, 1e-9);
  }

  const auto fin = ClosedSet::finite({make_vector({0, 0}), make_vector({3, 1})});
  const auto f = sample_boundary(fin, 5, 1);
  ASSERT_EQ(f.size(), 5u);
  for (const auto& p : f) EXPECT_TRUE(contains(fin, p, 0.0));
}

TEST(BoundarySampling, EveryVariantYieldsMembers) {
  const std::vector<ClosedSet> sets{
      unit_square(), ClosedSet::truncated_l1_hull(5), ClosedSet::segment(make_vector({0, 0, 0}), make_vector({1, 2, 3})),
      ClosedSet::ball(make_vector({1, 1}), 2.0, Norm::sup()), disk_as_sublevel(),
      ClosedSet::union_of({unit_square(), ClosedSet::circle(make_vector({5, 0}), 1.0)})};
  for (const auto& k : sets) {
    const auto pts = sample_boundary(k, 32, 11);
    ASSERT_EQ(pts.size(), 32u) << k.kind_name();
    for (const auto& p : pts) EXPECT_TRUE(contains(k, p, 1e-9)) << k.kind_name();
    EXPECT_EQ(pts, sample_boundary(k, 32, 11)) << k.kind_name();
  }
  EXPECT_THROW(sample_boundary(unit_square(), 0, 1), InvalidArgument);
}
