#include "proxlab/projection.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace proxlab;

namespace {

ClosedSet random_polytope(Rng& rng, Index dim) {
  const int m = 3 + static_cast<int>(rng.index(8));
  std::vector<Vector> v;
  for (int j = 0; j < m; ++j) v.push_back(rng.in_box(Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0)));
  return ClosedSet::polytope(v);
}

Vector outside_point(Rng& rng, const ClosedSet& k) {
  for (;;) {
    Vector x = rng.in_box(Vector::Constant(k.dim(), -3.0), Vector::Constant(k.dim(), 3.0));
    if (!contains(k, x, 1e-6)) return x;
  }
}

ClosedSet sup_segment() { return ClosedSet::segment(make_vector({-2, 0}), make_vector({2, 0})); }

}  // namespace

TEST(Distance, SmallExamples) {
  const auto ball = distance(make_vector({2, 0}), ClosedSet::ball(Vector::Zero(2), 1.0, Norm::l2()), Norm::l2());
  EXPECT_NEAR(ball.distance, 1.0, 1e-10);
  EXPECT_TRUE(ball.minimizers.front().isApprox(make_vector({1, 0}), 1e-9));
  EXPECT_TRUE(ball.attained);

  const auto seg = distance(make_vector({2, 1}), ClosedSet::segment(make_vector({0, 0}), make_vector({1, 0})), Norm::l2());
  EXPECT_NEAR(seg.distance, std::sqrt(2.0), 1e-10);
  EXPECT_TRUE(seg.minimizers.front().isApprox(make_vector({1, 0}), 1e-8));

  const auto hull = distance(Vector::Zero(3), ClosedSet::truncated_l1_hull(3), Norm::l1());
  EXPECT_NEAR(hull.distance, 4.0 / 3.0, 1e-10);
  EXPECT_TRUE(hull.minimizers.front().isApprox(make_vector({0, 0, 4.0 / 3.0}), 1e-9));
}

TEST(Distance, TruncatedHullMatchesVertexFormula) {
  // Vertices have disjoint supports and nonnegative entries, so ||sum l_n e_n||_1 = sum l_n (n+1)/n:
  // the minimum over the simplex sits at the last vertex.
  for (Index n : {1, 2, 5, 17, 64}) {
    const auto r = distance(Vector::Zero(n), ClosedSet::truncated_l1_hull(n), Norm::l1());
    EXPECT_NEAR(r.distance, static_cast<double>(n + 1) / static_cast<double>(n), 1e-9);
  }
}

TEST(Distance, ResultInvariantsOnRandomConvexSets) {
  Rng rng(2024);
  Matrix hex(3, 2);
  hex << 1, 0, 0.5, 1, -0.5, 1;
  const std::vector<Norm> norms{Norm::l2(), Norm::l1(), Norm::sup(), Norm::lp(3)};
  for (int trial = 0; trial < 40; ++trial) {
    const Index dim = trial % 2 == 0 ? 2 : 3;
    const auto k = random_polytope(rng, dim);
    const auto x = outside_point(rng, k);
    const auto members = sample_members(k, 400, static_cast<std::uint64_t>(trial));
    for (const auto& n : norms) {
      const auto r = distance(x, k, n);
      for (const auto& m : r.minimizers) {
        EXPECT_TRUE(contains(k, m, 1e-7)) << n.describe();
        EXPECT_NEAR(n(x - m), r.distance, 1e-8 * (1 + r.distance)) << n.describe();
      }
      for (const auto& y : members) ASSERT_LE(r.distance, n(x - y) + 1e-8) << n.describe();
    }
  }
}

TEST(Distance, EuclideanProjectionSatisfiesVariationalInequality) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = random_polytope(rng, 3);
    const auto x = outside_point(rng, k);
    const Vector p = distance(x, k, Norm::l2()).minimizers.front();
    const Matrix& v = k.as<Polytope>()->vertices;
    for (Index j = 0; j < v.cols(); ++j) EXPECT_LE((x - p).dot(v.col(j) - p), 1e-8);
  }
}

TEST(Distance, BallsUnderMixedNorms) {
  // l2 distance to a sup ball: clamp coordinates.
  const auto box = ClosedSet::ball(Vector::Zero(2), 1.0, Norm::sup());
  const Vector x = make_vector({3, 0.5});
  EXPECT_NEAR(distance(x, box, Norm::l2()).distance, 2.0, 1e-8);
  // sup distance from (3,3) to the l1 unit ball: minimize max(|3-a|,|3-b|) with |a|+|b| <= 1.
  const auto diamond = ClosedSet::ball(Vector::Zero(2), 1.0, Norm::l1());
  EXPECT_NEAR(distance(make_vector({3, 3}), diamond, Norm::sup()).distance, 2.5, 1e-8);
  // Same-norm ball: radial formula.
  const auto b3 = ClosedSet::ball(make_vector({1, 1}), 0.5, Norm::lp(3));
  const Vector y = make_vector({4, -2});
  EXPECT_NEAR(distance(y, b3, Norm::lp(3)).distance, Norm::lp(3)(y - make_vector({1, 1})) - 0.5, 1e-10);
}

TEST(Distance, CurvesFiniteSetsAndUnions) {
  const auto circle = ClosedSet::circle(Vector::Zero(2), 1.0);
  EXPECT_NEAR(distance(make_vector({3, 4}), circle, Norm::l2()).distance, 4.0, 1e-8);
  EXPECT_NEAR(distance(make_vector({0.2, 0.1}), circle, Norm::l2()).distance, 1.0 - std::hypot(0.2, 0.1), 1e-8);
  const auto pts = ClosedSet::finite({make_vector({-1, 0}), make_vector({1, 0})});
  const auto r = distance(make_vector({0.5, 1}), pts, Norm::l2());
  EXPECT_NEAR(r.distance, std::hypot(0.5, 1), 1e-12);
  EXPECT_EQ(r.method, "enumeration");
  const auto u = ClosedSet::union_of({pts, circle});
  EXPECT_NEAR(distance(make_vector({0, 0.5}), u, Norm::l2()).distance, 0.5, 1e-8);
}

TEST(Distance, SublevelSetMatchesClosedForm) {
  const auto disk = ClosedSet::sublevel([](const Vector& v) { return v.squaredNorm(); }, 1.0, make_vector({-2, -2}),
                                        make_vector({2, 2}));
  for (const auto& x : {make_vector({3, 0}), make_vector({1.5, 1.5}), make_vector({-0.5, -1.7})})
    EXPECT_NEAR(distance(x, disk, Norm::l2()).distance, x.norm() - 1.0, 1e-6);
}

TEST(Distance, UnsupportedMethodThrows) {
  SolverConfig cfg;
  cfg.method = SolverMethod::FrankWolfe;
  EXPECT_THROW(distance(make_vector({2, 0}), ClosedSet::circle(Vector::Zero(2), 1), Norm::l2(), cfg), Unsupported);
}

TEST(CrossValidation, SolversAgreeOnRandomPolytopes) {
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const Index dim = trial % 2 == 0 ? 2 : 3;
    const auto k = random_polytope(rng, dim);
    const auto x = outside_point(rng, k);
    for (const auto& n : {Norm::l2(), Norm::lp(3)}) {
      const auto cv = cross_validate(x, k, n);
      EXPECT_EQ(cv.distances.size(), n.is_euclidean() ? 3u : 2u);
      EXPECT_LE(cv.spread, 1e-6) << n.describe() << " trial " << trial;
    }
    // Polyhedral norms: the linear program is exact; Frank-Wolfe may stop at a
    // kink but never undercuts it and stays within its own duality gap.
    for (const auto& n : {Norm::l1(), Norm::sup()}) {
      SolverConfig cfg;
      cfg.method = SolverMethod::LinearProgram;
      const double exact = distance(x, k, n, cfg).distance;
      cfg.method = SolverMethod::FrankWolfe;
      const auto fw = distance(x, k, n, cfg);
      EXPECT_GE(fw.distance, exact - 1e-9) << n.describe() << " trial " << trial;
      ASSERT_TRUE(std::isfinite(fw.residual));
      EXPECT_LE(fw.distance - exact, fw.residual + 1e-9) << n.describe() << " trial " << trial;
      if (fw.converged) {
        EXPECT_LE(fw.distance - exact, 1e-6) << n.describe() << " trial " << trial;
      }
      cfg.method = SolverMethod::Subgradient;
      EXPECT_GE(distance(x, k, n, cfg).distance, exact - 1e-9) << n.describe() << " trial " << trial;
    }
  }
}

TEST(CrossValidation, BallInForeignPolyhedralNorm) {
  // The l3 ball measured in l1 and sup: cutting planes against a fine angular
  // scan of the sphere (2-D) and against random sphere points (3-D).
  Rng rng(8);
  for (const Index dim : {2, 3}) {
    const auto b = ClosedSet::ball(Vector::Zero(dim), 1.0, Norm::lp(3));
    for (const auto& n : {Norm::l1(), Norm::sup()}) {
      for (int t = 0; t < 5; ++t) {
        const Vector x = 1.5 * rng.gaussian(dim).normalized() * (1.5 + t);
        const auto r = distance(x, b, n);
        EXPECT_EQ(r.method, "cutting_plane");
        EXPECT_TRUE(r.converged);
        EXPECT_NEAR(Norm::lp(3)(r.minimizers.front()), 1.0, 1e-12);
        double scan = 1e300;
        if (dim == 2) {
          auto along = [&](double a) {
            const Vector u = make_vector({std::cos(a), std::sin(a)});
            return n(x - u / Norm::lp(3)(u));
          };
          const int steps = 100000;
          double best_a = 0.0;
          for (int i = 0; i < steps; ++i) {
            const double a = 2 * M_PI * i / steps;
            if (along(a) < scan) {
              scan = along(a);
              best_a = a;
            }
          }
          const double h = 2 * M_PI / steps;
          scan = std::min(scan, detail::golden_section_min(along, best_a - 2 * h, best_a + 2 * h, 1e-15).value);
          EXPECT_LE(r.distance, scan + 1e-10);
          EXPECT_GE(r.distance, scan - 1e-9);
        } else {
          for (int i = 0; i < 20000; ++i) {
            const Vector u = rng.gaussian(3);
            scan = std::min(scan, n(x - u / Norm::lp(3)(u)));
          }
          EXPECT_LE(r.distance, scan + 1e-10);
        }
      }
    }
  }
}

TEST(CrossValidation, GridBruteForceWithinTwoSteps) {
  const double step = 1e-3;
  const std::vector<std::pair<ClosedSet, Norm>> cases{
      {sup_segment(), Norm::sup()},
      {ClosedSet::circle(Vector::Zero(2), 1.0), Norm::l2()},
      {ClosedSet::segment(make_vector({1, 0}), make_vector({0, 1})), Norm::l1()},
      {ClosedSet::ball(Vector::Zero(2), 1.0, Norm::lp(3)), Norm::l2()}};
  for (const auto& [k, n] : cases) {
    const Vector x = make_vector({0.3, 1.7});
    const auto g = grid_brute_force_distance(x, k, n, step);
    EXPECT_NEAR(g.distance, distance(x, k, n).distance, 2 * step) << k.kind_name();
  }
}

TEST(BestApproximations, CircleFromCenterAndOutside) {
  const auto circle = ClosedSet::circle(Vector::Zero(2), 1.0);
  const auto c = best_approximations(Vector::Zero(2), circle, Norm::l2());
  EXPECT_NEAR(c.distance, 1.0, 1e-9);
  EXPECT_NEAR(c.cluster_diameter, 2.0, 1e-3);
  EXPECT_FALSE(c.singleton());
  const auto o = best_approximations(make_vector({2, 0}), circle, Norm::l2());
  EXPECT_TRUE(o.singleton());
  EXPECT_TRUE(o.minimizers.front().isApprox(make_vector({1, 0}), 1e-6));
}

TEST(BestApproximations, SupSegmentAgainstGridOracle) {
  const Vector x = make_vector({0, 1});
  const auto r = best_approximations(x, sup_segment(), Norm::sup());
  // Grid oracle: t in [-2,2], ||(t,-1)||_inf = max(|t|,1); near-minimizers span |t| <= 1.
  double lo = 1e9, hi = -1e9, best = 1e9;
  for (int i = 0; i <= 400000; ++i) best = std::min(best, std::max(std::abs(-2.0 + 1e-5 * i), 1.0));
  for (int i = 0; i <= 400000; ++i) {
    const double t = -2.0 + 1e-5 * i;
    if (std::max(std::abs(t), 1.0) <= best + 1e-9) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  EXPECT_NEAR(r.distance, best, 1e-9);
  EXPECT_NEAR(r.cluster_diameter, Norm::sup()(make_vector({hi - lo, 0})), 1e-3);
  EXPECT_NEAR(r.cluster_diameter, 2.0, 1e-3);
  EXPECT_FALSE(r.singleton());
}

TEST(BestApproximations, L1SegmentFromOrigin) {
  const auto seg = ClosedSet::segment(make_vector({1, 0}), make_vector({0, 1}));
  const auto r = best_approximations(Vector::Zero(2), seg, Norm::l1());
  EXPECT_NEAR(r.distance, 1.0, 1e-9);
  EXPECT_GE(r.cluster_diameter, 1.0 - 1e-3);
  EXPECT_FALSE(r.singleton());
}

TEST(BestApproximations, TwoPointsOnTheBisector) {
  const auto pts = ClosedSet::finite({make_vector({-1, 0}), make_vector({1, 0})});
  const auto r = best_approximations(make_vector({0, 1}), pts, Norm::l2());
  EXPECT_EQ(r.cluster_count, 2);
  EXPECT_NEAR(r.cluster_diameter, 2.0, 1e-12);
  EXPECT_TRUE(best_approximations(make_vector({0.1, 1}), pts, Norm::l2()).singleton());
}

TEST(MinimizingSequence, SolverIteratesConvergeOnEuclideanPolytope) {
  Rng rng(3);
  const auto k = random_polytope(rng, 2);
  const auto x = outside_point(rng, k);
  const auto s = minimizing_sequence(x, k, Norm::l2(), SequenceStrategy::SolverIterates, 64, 1);
  ASSERT_GE(s.points.size(), 2u);
  EXPECT_NEAR(s.values.back(), s.target, 1e-8);
  EXPECT_LT(s.cauchy_tail_diameter, 1e-6);
  for (const auto& p : s.points) EXPECT_TRUE(contains(k, p, 1e-7));
}

TEST(MinimizingSequence, FiniteSetGivesConstantSequence) {
  const auto pts = ClosedSet::finite({make_vector({-1, 0}), make_vector({1, 0})});
  for (auto st : {SequenceStrategy::SolverIterates, SequenceStrategy::VertexSweep, SequenceStrategy::RandomizedDescent}) {
    const auto s = minimizing_sequence(make_vector({0.4, 1}), pts, Norm::l2(), st, 10, 2);
    ASSERT_EQ(s.points.size(), 10u);
    for (const auto& p : s.points) EXPECT_EQ(p, make_vector({1, 0}));
    EXPECT_EQ(s.cauchy_tail_diameter, 0.0);
  }
}

TEST(MinimizingSequence, AllStrategiesReachTheDistance) {
  const auto k = ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({2, -0.5}),
                                                         make_vector({3, 1}), make_vector({1.5, 2.5})});
  const Vector x = make_vector({4, 3});
  const double d = distance(x, k, Norm::l2()).distance;
  for (auto st : {SequenceStrategy::SolverIterates, SequenceStrategy::VertexSweep, SequenceStrategy::RandomizedDescent}) {
    const auto s = minimizing_sequence(x, k, Norm::l2(), st, 64, 4);
    EXPECT_NEAR(s.values.back(), d, 1e-6) << to_string(st);
    EXPECT_LT(s.cauchy_tail_diameter, 1e-3) << to_string(st);
  }
}

TEST(MinimizingSequence, SupSegmentAdversaryOscillates) {
  const auto s = minimizing_sequence(make_vector({0, 1}), sup_segment(), Norm::sup(), SequenceStrategy::RandomizedDescent,
                                     64, 7);
  EXPECT_NEAR(s.values.back(), 1.0, 1e-6);
  EXPECT_GE(s.cauchy_tail_diameter, 1.9);
}

TEST(MinimizingSequence, TruncatedHullSweepDoesNotSettle) {
  const auto s = truncated_hull_sweep({2, 4, 8, 16, 32, 64});
  EXPECT_GT(s.cauchy_tail_diameter, 2.0);
  for (std::size_t i = 1; i < s.values.size(); ++i) EXPECT_LT(s.values[i], s.values[i - 1]);
  EXPECT_NEAR(s.values.back(), 65.0 / 64.0, 1e-12);
}

TEST(MinimizingSequence, PointInSetIsSignalled) {
  EXPECT_THROW(minimizing_sequence(make_vector({1, 0}), sup_segment(), Norm::sup(), SequenceStrategy::VertexSweep, 8, 1),
               PointInSet);
  EXPECT_THROW(minimizing_sequence(make_vector({3, 0}), sup_segment(), Norm::sup(), SequenceStrategy::VertexSweep, 1, 1),
               InvalidArgument);
}

TEST(Chebyshev, EuclideanPolytopeOnHundredProbes) {
  const auto k = ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({2, -0.5}), make_vector({3, 1}),
                                                         make_vector({1.5, 2.5}), make_vector({-0.5, 1.5})});
  Rng rng(19);
  std::vector<Vector> probes;
  while (probes.size() < 100) {
    Vector p = rng.in_box(make_vector({-4, -4}), make_vector({6, 6}));
    if (!contains(k, p, 1e-6)) probes.push_back(p);
  }
  const auto rep = chebyshev_verdict(k, Norm::l2(), probes);
  EXPECT_EQ(rep.verdict, ChebyshevVerdict::ChebyshevEvidence);
  EXPECT_EQ(rep.probes.size(), 100u);
  EXPECT_FALSE(rep.witness.has_value());
}

TEST(Chebyshev, CircleCenterIsAWitness) {
  const auto rep = chebyshev_verdict(ClosedSet::circle(Vector::Zero(2), 1.0), Norm::l2(),
                                     {make_vector({2, 0}), make_vector({0, 0})});
  EXPECT_EQ(rep.verdict, ChebyshevVerdict::ProximinalNotUnique);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_EQ(*rep.witness, make_vector({0, 0}));
  EXPECT_TRUE(rep.probes[0].singleton);
  EXPECT_NEAR(rep.probes[1].cluster_diameter, 2.0, 1e-3);
}

TEST(Chebyshev, TruncationFamilyIsNotProximinal) {
  FamilyTrend trend;
  std::vector<Vector> mins;
  for (Index n : {2, 4, 8, 16, 32, 64, 128}) {
    const auto r = distance(Vector::Zero(n), ClosedSet::truncated_l1_hull(n), Norm::l1());
    trend.sizes.push_back(n);
    trend.distances.push_back(r.distance);
    mins.push_back(r.minimizers.front());
  }
  const auto rep = proximinality_trend(Vector::Zero(1), trend, mins, Norm::l1());
  EXPECT_EQ(rep.verdict, ChebyshevVerdict::NotProximinalEvidence);
  EXPECT_TRUE(trend.strictly_decreasing);
  EXPECT_FALSE(trend.limit_attained);
  EXPECT_GT(trend.min_pairwise_gap, 2.0);
  EXPECT_NEAR(trend.limit_estimate, 1.0, 1e-2);
}

TEST(Continuity, ConvexEuclideanProjectionIsNonexpansive) {
  const auto k = ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({2, -0.5}), make_vector({3, 1})});
  const auto rep = projection_continuity_probe(k, Norm::l2(), make_vector({3, 3}), 0.5, 64, 4);
  EXPECT_TRUE(rep.center_singleton);
  EXPECT_FALSE(rep.discontinuity_witness.has_value());
  EXPECT_LE(rep.modulus_estimate, 1.0 + 1e-6);
}

TEST(Continuity, TwoPointJumpAcrossBisector) {
  const auto pts = ClosedSet::finite({make_vector({-1, 0}), make_vector({1, 0})});
  const auto rep = projection_continuity_probe(pts, Norm::l2(), make_vector({0, 1}), 0.1, 64, 4);
  ASSERT_TRUE(rep.discontinuity_witness.has_value());
  const auto& w = *rep.discontinuity_witness;
  EXPECT_GE(w.jump, 1.9);
  EXPECT_LE(w.input_gap, 0.2);
  // The two inputs sit on opposite sides of the bisector x = 0.
  EXPECT_LT(w.a(0) * w.b(0), 0.0);
}

TEST(Compactness, ConvergentAndNonConvergentSequences) {
  const auto k = ClosedSet::polytope(std::vector<Vector>{make_vector({0, 0}), make_vector({2, 0}), make_vector({1, 1})});
  const Vector x = make_vector({1, 3});
  const auto s = minimizing_sequence(x, k, Norm::l2(), SequenceStrategy::SolverIterates, 64, 1);
  EXPECT_TRUE(approximative_compactness_probe(k, Norm::l2(), x, {s}).all_converge);

  const auto sweep = truncated_hull_sweep({2, 4, 8, 16, 32, 64, 128, 256});
  const auto rep = approximative_compactness_probe(ClosedSet::truncated_l1_hull(256), Norm::l1(), Vector::Zero(256), {sweep});
  EXPECT_FALSE(rep.all_converge);
  ASSERT_TRUE(rep.failure_index.has_value());
  EXPECT_GT(rep.failure_gap, 2.0);
}

TEST(Lipschitz, DistanceFunctionsAreOneLipschitz) {
  const std::vector<std::pair<ClosedSet, Norm>> cases{
      {ClosedSet::circle(Vector::Zero(2), 1.0), Norm::l2()},
      {sup_segment(), Norm::sup()},
      {ClosedSet::finite({make_vector({-1, 0}), make_vector({1, 0})}), Norm::l2()},
      {ClosedSet::truncated_l1_hull(8), Norm::l1()},
      {ClosedSet::ball(Vector::Zero(3), 1.0, Norm::lp(3)), Norm::l1()}};
  for (const auto& [k, n] : cases) {
    const auto rep = lipschitz_check(k, n, 1000, 5);
    EXPECT_EQ(rep.pairs + rep.skipped, 1000);
    EXPECT_LE(rep.max_ratio, 1.0 + 1e-6) << k.kind_name() << " " << n.describe();
    EXPECT_GT(rep.max_ratio, 0.5) << k.kind_name();
  }
}

TEST(Determinism, RepeatedCallsAgreeBitForBit) {
  const auto k = ClosedSet::circle(Vector::Zero(2), 1.0);
  const auto a = best_approximations(make_vector({0.01, 0}), k, Norm::l2());
  const auto b = best_approximations(make_vector({0.01, 0}), k, Norm::l2());
  EXPECT_EQ(a.distance, b.distance);
  EXPECT_EQ(a.minimizers, b.minimizers);
  const auto s1 = minimizing_sequence(make_vector({0, 1}), sup_segment(), Norm::sup(), SequenceStrategy::RandomizedDescent, 32, 9);
  const auto s2 = minimizing_sequence(make_vector({0, 1}), sup_segment(), Norm::sup(), SequenceStrategy::RandomizedDescent, 32, 9);
  EXPECT_EQ(s1.points, s2.points);
}
