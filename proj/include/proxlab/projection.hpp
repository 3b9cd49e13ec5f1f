#pragma once

// Distance to a closed set, best-approximation clusters, minimizing sequences
// and the diagnostics built on them (uniqueness verdicts, continuity of the
// metric projection, approximative compactness, Lipschitz audit).

#include "proxlab/core.hpp"
#include "proxlab/detail/polytope.hpp"
#include "proxlab/norm.hpp"
#include "proxlab/sets.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace proxlab {

enum class SolverMethod { Auto, ClosedForm, LinearProgram, FrankWolfe, Subgradient, GridRefinement };

inline const char* to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::ClosedForm: return "closed_form";
    case SolverMethod::LinearProgram: return "linear_program";
    case SolverMethod::FrankWolfe: return "frank_wolfe";
    case SolverMethod::Subgradient: return "subgradient";
    case SolverMethod::GridRefinement: return "grid_refinement";
  }
  return "?";
}

struct SolverConfig {
  SolverMethod method = SolverMethod::Auto;
  double tolerance = 1e-10;
  int max_iterations = 20000;
  int curve_grid = 4096;
  int direction_grid = 720;
  bool record_trace = false;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultArgminSlack = 1e-9;

/// Relative tolerance under which an argmin cluster counts as one point.
inline double uniqueness_tolerance(double distance) { return 1e-4 * (1.0 + distance); }

struct ApproxResult {
  double distance = 0.0;
  std::vector<Vector> minimizers;  // one representative per argmin cluster
  double cluster_diameter = 0.0;
  int cluster_count = 1;
  int candidates = 0;  // eps-minimizers behind the clusters
  int iterations = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool attained = false;
  bool converged = false;
  std::string method;
  std::vector<Vector> trace;

  bool singleton() const { return cluster_diameter <= uniqueness_tolerance(distance); }
};

namespace projection_detail {

/// Vertex form of l1 / weighted l1 / sup balls, when small enough.
inline std::optional<Matrix> ball_vertices(const NormBall& b) {
  const Index n = b.center.size();
  const Norm& nm = b.norm;
  if (detail::lp_model::l1_family(nm)) {
    Matrix v(n, 2 * n);
    for (Index i = 0; i < n; ++i) {
      const double w = nm.kind() == NormKind::WeightedLp ? nm.weights()(i) : 1.0;
      v.col(2 * i) = b.center;
      v.col(2 * i + 1) = b.center;
      v(i, 2 * i) += b.radius / w;
      v(i, 2 * i + 1) -= b.radius / w;
    }
    return v;
  }
  if (nm.kind() == NormKind::Sup && n <= 10) {
    const Index m = Index{1} << n;
    Matrix v(n, m);
    for (Index code = 0; code < m; ++code)
      for (Index i = 0; i < n; ++i) v(i, code) = b.center(i) + (((code >> i) & 1) ? b.radius : -b.radius);
    return v;
  }
  return std::nullopt;
}

/// Euclidean projection onto a ball, where it has a finite formula.
inline std::optional<std::function<Vector(const Vector&)>> ball_projector(const NormBall& b) {
  const Norm& nm = b.norm;
  if (nm.is_euclidean()) {
    return [b](const Vector& z) -> Vector {
      const Vector u = z - b.center;
      const double r = u.norm();
      return r <= b.radius ? z : Vector(b.center + (b.radius / r) * u);
    };
  }
  if (nm.kind() == NormKind::Sup) {
    return [b](const Vector& z) -> Vector {
      return (z - b.center).cwiseMax(-b.radius).cwiseMin(b.radius) + b.center;
    };
  }
  if (nm.kind() == NormKind::Lp && nm.p() == 1.0) {
    return [b](const Vector& z) -> Vector {
      const Vector u = z - b.center;
      if (u.lpNorm<1>() <= b.radius) return z;
      std::vector<double> a(u.size());
      for (Index i = 0; i < u.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(u(i));
      std::sort(a.begin(), a.end(), std::greater<>());
      double cum = 0.0, theta = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        cum += a[k];
        const double t = (cum - b.radius) / static_cast<double>(k + 1);
        if (a[k] > t) theta = t;
      }
      Vector out(u.size());
      for (Index i = 0; i < u.size(); ++i)
        out(i) = (u(i) > 0 ? 1.0 : -1.0) * std::max(std::abs(u(i)) - theta, 0.0);
      return out + b.center;
    };
  }
  return std::nullopt;
}

inline ApproxResult from_solve(detail::PolytopeSolve s, const char* method) {
  ApproxResult r;
  r.distance = s.distance;
  r.minimizers.push_back(std::move(s.point));
  r.iterations = s.iterations;
  r.residual = s.gap;
  r.converged = s.converged;
  r.attained = s.converged;
  r.method = method;
  r.trace = std::move(s.trace);
  return r;
}

inline ApproxResult polytope_solve(const Matrix& v, const Vector& x, const Norm& norm,
                                   const SolverConfig& cfg, SolverMethod method) {
  if (method == SolverMethod::Auto)
    method = (norm.is_euclidean() || norm.is_polyhedral()) ? SolverMethod::ClosedForm
                                                           : SolverMethod::FrankWolfe;
  switch (method) {
    case SolverMethod::ClosedForm:
      if (norm.is_euclidean()) {
        auto r = from_solve(detail::euclidean_distance(v, x), "min_norm_point");
        r.converged = r.attained = true;
        if (cfg.record_trace) r.trace = {r.minimizers.front()};
        return r;
      }
      if (norm.is_polyhedral()) return polytope_solve(v, x, norm, cfg, SolverMethod::LinearProgram);
      throw Unsupported("no finite method for this norm on a polytope");
    case SolverMethod::LinearProgram: {
      auto r = from_solve(detail::lp_distance(v, x, norm), "linear_program");
      r.converged = r.attained = true;
      if (cfg.record_trace) r.trace = {r.minimizers.front()};
      return r;
    }
    case SolverMethod::FrankWolfe:
      return from_solve(detail::frank_wolfe(v, x, norm, cfg.tolerance, cfg.max_iterations, cfg.record_trace),
                        "frank_wolfe");
    case SolverMethod::Subgradient: {
      Index start = 0;
      double best = norm(x - v.col(0));
      for (Index j = 1; j < v.cols(); ++j) {
        const double val = norm(x - v.col(j));
        if (val < best) {
          best = val;
          start = j;
        }
      }
      const double width = std::max(1e-3, (v.rowwise().maxCoeff() - v.rowwise().minCoeff()).norm());
      auto s = detail::subgradient_descent([&](const Vector& z) { return detail::euclidean_projection(v, z); },
                                           x, norm, v.col(start), 0.25 * width, cfg.tolerance,
                                           cfg.max_iterations, cfg.record_trace);
      return from_solve(std::move(s), "subgradient");
    }
    default:
      throw Unsupported(std::string(to_string(method)) + " is not available for polytopes");
  }
}

inline ApproxResult ball_solve(const NormBall& b, const Vector& x, const Norm& norm,
                               const SolverConfig& cfg, SolverMethod method) {
  if (method == SolverMethod::Auto) {
    if (norm == b.norm)
      method = SolverMethod::ClosedForm;
    else if (norm.is_polyhedral())
      method = SolverMethod::LinearProgram;
    else
      method = SolverMethod::FrankWolfe;
  }
  switch (method) {
    case SolverMethod::ClosedForm: {
      if (norm == b.norm || b.norm(x - b.center) <= b.radius) {
        auto r = from_solve(set_detail::ball_distance(b, x, norm), "closed_form");
        if (cfg.record_trace) r.trace = {r.minimizers.front()};
        return r;
      }
      if (auto v = ball_vertices(b); v && (norm.is_euclidean() || norm.is_polyhedral())) {
        auto r = polytope_solve(*v, x, norm, cfg, SolverMethod::ClosedForm);
        return r;
      }
      throw Unsupported("no closed form for a ball measured in a different norm");
    }
    case SolverMethod::LinearProgram: {
      if (!norm.is_polyhedral()) throw Unsupported("linear program needs a polyhedral norm");
      if (auto v = ball_vertices(b)) return polytope_solve(*v, x, norm, cfg, SolverMethod::LinearProgram);
      return from_solve(set_detail::ball_cutting_plane(b, x, norm, cfg.tolerance, 2000, cfg.record_trace),
                        "cutting_plane");
    }
    case SolverMethod::FrankWolfe:
      return from_solve(set_detail::ball_distance(b, x, norm, cfg.tolerance, cfg.max_iterations, cfg.record_trace),
                        "frank_wolfe");
    case SolverMethod::Subgradient: {
      auto proj = ball_projector(b);
      if (!proj) throw Unsupported("no Euclidean projection onto this ball");
      const Vector start = (*proj)(x);
      auto s = detail::subgradient_descent(*proj, x, norm, start, 0.5 * b.radius, cfg.tolerance,
                                           cfg.max_iterations, cfg.record_trace);
      return from_solve(std::move(s), "subgradient");
    }
    default:
      throw Unsupported(std::string(to_string(method)) + " is not available for balls");
  }
}

}  // namespace projection_detail

/// d_K(x) in `norm`, with the solver chosen by `cfg.method`.
inline ApproxResult distance(const Vector& x, const ClosedSet& k, const Norm& norm,
                             const SolverConfig& cfg = {}) {
  if (!(cfg.tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (x.size() != k.dim()) throw DimensionMismatch(k.dim(), x.size());
  require_finite(x, "query point");
  norm.check_dim(x);
  return std::visit(
      [&](const auto& s) -> ApproxResult {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          ApproxResult r;
          auto hits = nearest_candidates(k, x, norm);
          r.distance = hits.front().value;
          for (const auto& h : hits)
            if (h.value <= r.distance) r.minimizers.push_back(h.point);
          r.iterations = static_cast<int>(hits.size());
          r.residual = 0.0;
          r.attained = r.converged = true;
          r.method = "enumeration";
          if (cfg.record_trace) r.trace = {r.minimizers.front()};
          return r;
        } else if constexpr (std::is_same_v<T, Polytope>) {
          return projection_detail::polytope_solve(s.vertices, x, norm, cfg, cfg.method);
        } else if constexpr (std::is_same_v<T, NormBall>) {
          return projection_detail::ball_solve(s, x, norm, cfg, cfg.method);
        } else if constexpr (std::is_same_v<T, UnionOf>) {
          ApproxResult best;
          bool first = true;
          for (std::size_t p = 0; p < s.parts.size(); ++p) {
            SolverConfig sub = cfg;
            sub.seed = derive_seed(cfg.seed, p);
            auto r = distance(x, s.parts[p], norm, sub);
            if (first || r.distance < best.distance) {
              best = std::move(r);
              first = false;
            }
          }
          best.method = "union:" + best.method;
          return best;
        } else {
          // Curves and sublevel sets: grid plus refinement.
          if (cfg.method != SolverMethod::Auto && cfg.method != SolverMethod::GridRefinement)
            throw Unsupported(std::string(to_string(cfg.method)) + " is not available for " + k.kind_name());
          auto hits = nearest_candidates(k, x, norm, cfg.curve_grid, cfg.direction_grid, cfg.seed);
          ApproxResult r;
          r.distance = hits.front().value;
          for (const auto& h : hits)
            if (h.value <= r.distance + cfg.tolerance) r.minimizers.push_back(h.point);
          r.iterations = static_cast<int>(hits.size());
          r.attained = r.converged = true;
          r.method = "grid_refinement";
          if (cfg.record_trace) r.trace = {r.minimizers.front()};
          return r;
        }
      },
      k.rep());
}

// ---------------------------------------------------------------------------
// Best approximations: sample and solve for members of K, keep those within
// distance + eps and cluster them.

namespace projection_detail {

struct Pool {
  std::vector<Vector> points;
  double spacing = 0.0;  // largest gap between neighbouring pool points on a connected piece
};

inline void add_segment(Pool& pool, const Vector& a, const Vector& b, const Norm& norm, int pieces) {
  for (int j = 0; j <= pieces; ++j) pool.points.push_back(a + (static_cast<double>(j) / pieces) * (b - a));
  pool.spacing = std::max(pool.spacing, norm(b - a) / pieces);
}

inline void polytope_pool(Pool& pool, const Matrix& v, const Vector& x, const Norm& norm, double d,
                          double eps, const std::vector<Vector>& solved, std::uint64_t seed) {
  const Index n = v.rows(), m = v.cols();
  constexpr int kPieces = 64;
  const bool small = n * m <= 200000;
  if (m <= 512)
    for (Index j = 0; j < m; ++j) pool.points.push_back(v.col(j));
  if (m <= 24)
    for (Index a = 0; a < m; ++a)
      for (Index b = a + 1; b < m; ++b) add_segment(pool, v.col(a), v.col(b), norm, kPieces);
  if (small) {
    auto members = sample_members(ClosedSet::polytope(v), 2000, seed);
    pool.points.insert(pool.points.end(), members.begin(), members.end());
  }
  if (norm.is_polyhedral() && n <= 16 && m <= 512) {
    // Extreme points of the argmin face along coordinate directions. The face
    // is convex, so segments between its extremes stay inside it.
    std::vector<Vector> extremes = solved;
    for (Index i = 0; i < n; ++i) {
      for (double sg : {1.0, -1.0}) {
        Vector dir = Vector::Zero(n);
        dir(i) = sg;
        if (auto e = detail::lp_extent(v, x, norm, d + 0.5 * eps, dir)) extremes.push_back(*e);
      }
    }
    for (std::size_t a = 0; a < extremes.size(); ++a)
      for (std::size_t b = a + 1; b < extremes.size(); ++b)
        add_segment(pool, extremes[a], extremes[b], norm, kPieces);
  }
}

inline Pool candidate_pool(const ClosedSet& k, const Vector& x, const Norm& norm, double d,
                           double eps, const std::vector<Vector>& solved, const SolverConfig& cfg) {
  Pool pool;
  pool.points = solved;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          pool.points.insert(pool.points.end(), s.points.begin(), s.points.end());
        } else if constexpr (std::is_same_v<T, Polytope>) {
          polytope_pool(pool, s.vertices, x, norm, d, eps, solved, cfg.seed);
        } else if constexpr (std::is_same_v<T, NormBall>) {
          if (auto v = ball_vertices(s)) {
            polytope_pool(pool, *v, x, norm, d, eps, solved, cfg.seed);
          } else {
            auto b = sample_boundary(k, 4000, cfg.seed);
            pool.points.insert(pool.points.end(), b.begin(), b.end());
          }
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          const int g = std::max(cfg.curve_grid, 8);
          const double h = (s.t_max - s.t_min) / g;
          Vector prev = s.map(s.t_min);
          pool.points.push_back(prev);
          for (int j = 1; j <= g; ++j) {
            Vector p = s.map(s.t_min + j * h);
            pool.spacing = std::max(pool.spacing, norm(p - prev));
            pool.points.push_back(p);
            prev = std::move(p);
          }
        } else if constexpr (std::is_same_v<T, SublevelSet>) {
          if (s.interior.size() == 2) {
            constexpr double kTwoPi = 6.283185307179586;
            const int g = std::max(cfg.direction_grid, 16);
            Vector prev;
            for (int j = 0; j <= g; ++j) {
              Vector w(2);
              w << std::cos(kTwoPi * j / g), std::sin(kTwoPi * j / g);
              Vector p = set_detail::sublevel_exit(s, w);
              if (j > 0) pool.spacing = std::max(pool.spacing, norm(p - prev));
              pool.points.push_back(p);
              prev = std::move(p);
            }
          } else {
            auto b = sample_boundary(k, 4000, cfg.seed);
            pool.points.insert(pool.points.end(), b.begin(), b.end());
          }
        } else {
          std::uint64_t c = 0;
          for (const auto& part : s.parts) {
            SolverConfig sub = cfg;
            sub.seed = derive_seed(cfg.seed, c++);
            auto r = distance(x, part, norm, sub);
            auto p = candidate_pool(part, x, norm, d, eps, r.minimizers, sub);
            pool.points.insert(pool.points.end(), p.points.begin(), p.points.end());
            pool.spacing = std::max(pool.spacing, p.spacing);
          }
        }
      },
      k.rep());
  return pool;
}

/// Single-linkage clusters (union-find); returns a cluster id per point.
inline std::vector<int> single_linkage(const std::vector<Vector>& pts, const Norm& norm, double radius) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j) && norm(pts[i] - pts[j]) <= radius) parent[find(j)] = find(i);
  std::vector<int> id(n, -1), label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (label[r] < 0) label[r] = next++;
    id[i] = label[r];
  }
  return id;
}

inline double diameter(const std::vector<Vector>& pts, const Norm& norm) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, norm(pts[i] - pts[j]));
  return d;
}

}  // namespace projection_detail

/// P_K(x) up to eps: clusters of members of K within d_K(x) + eps of x.
inline ApproxResult best_approximations(const Vector& x, const ClosedSet& k, const Norm& norm,
                                        double eps = kDefaultArgminSlack, const SolverConfig& cfg = {}) {
  if (!(eps > cfg.tolerance)) throw InvalidArgument("eps must exceed the solver tolerance");
  ApproxResult r = distance(x, k, norm, cfg);
  const double d = r.distance;
  auto pool = projection_detail::candidate_pool(k, x, norm, d, eps, r.minimizers, cfg);

  std::vector<Vector> near;
  std::vector<double> values;
  for (auto& p : pool.points) {
    const double val = norm(x - p);
    if (val <= d + eps) {
      near.push_back(std::move(p));
      values.push_back(val);
    }
  }
  if (near.empty()) {  // solver point rounding; keep it regardless
    near = r.minimizers;
    for (const auto& p : near) values.push_back(norm(x - p));
  }
  const double link = std::max(10.0 * eps, 2.5 * pool.spacing);
  const auto id = projection_detail::single_linkage(near, norm, link);
  const int clusters = id.empty() ? 0 : *std::max_element(id.begin(), id.end()) + 1;
  std::vector<std::size_t> rep(static_cast<std::size_t>(clusters), near.size());
  for (std::size_t i = 0; i < near.size(); ++i) {
    auto& slot = rep[static_cast<std::size_t>(id[i])];
    if (slot == near.size() || values[i] < values[slot]) slot = i;
  }
  std::stable_sort(rep.begin(), rep.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  r.minimizers.clear();
  for (auto i : rep) r.minimizers.push_back(near[i]);
  r.cluster_count = clusters;
  r.candidates = static_cast<int>(near.size());
  r.cluster_diameter = projection_detail::diameter(near, norm);
  return r;
}

// ---------------------------------------------------------------------------
// Minimizing sequences

enum class SequenceStrategy { SolverIterates, VertexSweep, RandomizedDescent };

inline const char* to_string(SequenceStrategy s) {
  switch (s) {
    case SequenceStrategy::SolverIterates: return "solver_iterates";
    case SequenceStrategy::VertexSweep: return "vertex_sweep";
    case SequenceStrategy::RandomizedDescent: return "randomized_descent";
  }
  return "?";
}

struct MinimizingSequence {
  std::vector<Vector> points;
  std::vector<double> values;
  double target = 0.0;
  double cauchy_tail_diameter = 0.0;
  std::string strategy;
};

/// Diameter over the last quarter of the points (at least two of them).
inline double tail_diameter(const std::vector<Vector>& pts, const Norm& norm) {
  const std::size_t n = pts.size();
  const std::size_t tail = std::min(n, std::max<std::size_t>(2, n / 4));
  std::vector<Vector> t(pts.end() - static_cast<std::ptrdiff_t>(tail), pts.end());
  return projection_detail::diameter(t, norm);
}

inline MinimizingSequence finish_sequence(std::vector<Vector> pts, const Vector& x, const Norm& norm,
                                          double target, const char* strategy) {
  MinimizingSequence s;
  s.target = target;
  s.strategy = strategy;
  for (const auto& p : pts) s.values.push_back(norm(x - p));
  s.cauchy_tail_diameter = tail_diameter(pts, norm);
  s.points = std::move(pts);
  return s;
}

namespace projection_detail {

inline std::vector<Vector> resample(const std::vector<Vector>& trace, int length) {
  std::vector<Vector> out;
  const std::size_t t = trace.size();
  if (static_cast<int>(t) >= length) {
    for (int i = 0; i < length; ++i)
      out.push_back(trace[static_cast<std::size_t>(std::llround(static_cast<double>(i) * (t - 1) / (length - 1)))]);
  } else {
    out = trace;
    while (static_cast<int>(out.size()) < length) out.push_back(trace.back());
  }
  return out;
}

/// Anchors for a sweep: vertices, curve grid nodes or boundary samples.
inline std::vector<NearPoint> anchors(const ClosedSet& k, const Vector& x, const Norm& norm, std::uint64_t seed) {
  std::vector<NearPoint> out;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          for (const auto& p : s.points) out.push_back({p, norm(x - p)});
        } else if constexpr (std::is_same_v<T, Polytope>) {
          for (Index j = 0; j < s.vertices.cols(); ++j) out.push_back({s.vertices.col(j), norm(x - s.vertices.col(j))});
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          for (int j = 0; j <= 64; ++j) {
            const double t = s.t_min + (s.t_max - s.t_min) * j / 64.0;
            const Vector p = s.map(t);
            out.push_back({p, norm(x - p), t});
          }
        } else if constexpr (std::is_same_v<T, UnionOf>) {
          std::uint64_t c = 0;
          for (const auto& part : s.parts) {
            auto a = anchors(part, x, norm, derive_seed(seed, c++));
            out.insert(out.end(), a.begin(), a.end());
          }
        } else {
          for (auto& p : sample_boundary(k, 32, seed)) out.push_back({p, norm(x - p)});
        }
      },
      k.rep());
  return out;
}

}  // namespace projection_detail

/// A minimizing sequence for x in K built by `strategy`. Values are
/// nonincreasing and approach d_K(x).
inline MinimizingSequence minimizing_sequence(const Vector& x, const ClosedSet& k, const Norm& norm,
                                              SequenceStrategy strategy, int length, std::uint64_t seed,
                                              SolverConfig cfg = {}) {
  if (length < 2) throw InvalidArgument("sequence length must be at least 2");
  if (contains(k, x, cfg.tolerance, norm)) throw PointInSet();
  cfg.seed = seed;
  const char* name = to_string(strategy);

  if (k.as<FinitePointSet>()) {
    const auto r = distance(x, k, norm, cfg);
    return finish_sequence(std::vector<Vector>(static_cast<std::size_t>(length), r.minimizers.front()), x, norm,
                           r.distance, name);
  }

  switch (strategy) {
    case SequenceStrategy::SolverIterates: {
      SolverConfig c = cfg;
      c.record_trace = true;
      if (k.as<Polytope>() || k.as<NormBall>()) c.method = SolverMethod::FrankWolfe;
      auto r = distance(x, k, norm, c);
      std::vector<Vector> trace = r.trace;
      if (trace.size() < 2 && (k.as<ParametricCurve>() || k.as<SublevelSet>() || k.as<UnionOf>())) {
        // Grid refinement iterates: the best point at successively finer grids.
        trace.clear();
        double best = std::numeric_limits<double>::infinity();
        for (int g = 8; g <= std::max(cfg.curve_grid, 8); g *= 2) {
          SolverConfig gc = cfg;
          gc.curve_grid = g;
          gc.direction_grid = std::max(16, g / 4);
          auto rr = distance(x, k, norm, gc);
          if (rr.distance <= best) {
            best = rr.distance;
            trace.push_back(rr.minimizers.front());
          }
        }
      }
      if (trace.empty()) trace = r.minimizers;
      return finish_sequence(projection_detail::resample(trace, length), x, norm, r.distance, name);
    }
    case SequenceStrategy::VertexSweep: {
      const auto r = distance(x, k, norm, cfg);
      const Vector p = r.minimizers.front();
      auto a = projection_detail::anchors(k, x, norm, seed);
      std::stable_sort(a.begin(), a.end(), [](const NearPoint& u, const NearPoint& v) { return u.value > v.value; });
      const std::size_t keep = std::min<std::size_t>(a.size(), static_cast<std::size_t>(length / 2));
      std::vector<Vector> pts;
      for (std::size_t i = a.size() - keep; i < a.size(); ++i) pts.push_back(a[i].point);
      const Vector last = pts.empty() ? p : pts.back();
      const auto* curve = k.as<ParametricCurve>();
      double t_last = std::numeric_limits<double>::quiet_NaN(), t_star = t_last;
      if (curve) {
        t_last = a.back().t;
        auto hits = set_detail::curve_nearest(*curve, x, norm, cfg.curve_grid);
        t_star = hits.front().t;
      }
      for (int j = 1; static_cast<int>(pts.size()) < length; ++j) {
        const double s = 1.0 - std::ldexp(1.0, -j);
        if (curve && std::isfinite(t_last) && std::isfinite(t_star)) {
          pts.push_back(curve->map(t_last + s * (t_star - t_last)));
        } else if (k.convex()) {
          pts.push_back(last + s * (p - last));
        } else {
          pts.push_back(p);
        }
      }
      return finish_sequence(std::move(pts), x, norm, r.distance, name);
    }
    case SequenceStrategy::RandomizedDescent: {
      // Adversarial: among members just under a shrinking level above d_K(x),
      // always jump to the one farthest from the previous point.
      auto ba = best_approximations(x, k, norm, std::max(kDefaultArgminSlack, 10 * cfg.tolerance), cfg);
      const double d = ba.distance;
      Rng rng(derive_seed(seed, "randomized_descent"));
      std::vector<Vector> members = sample_members(k, 400, derive_seed(seed, "members"));
      auto pool = projection_detail::candidate_pool(k, x, norm, d, kDefaultArgminSlack, ba.minimizers, cfg);
      std::vector<Vector> targets;
      for (const auto& q : pool.points)
        if (norm(x - q) <= d + kDefaultArgminSlack) targets.push_back(q);
      if (targets.empty()) targets = ba.minimizers;
      std::vector<Vector> cands = members;
      const auto* curve = k.as<ParametricCurve>();
      for (std::size_t ti = 0; ti < targets.size(); ti += std::max<std::size_t>(1, targets.size() / 64)) {
        const Vector& q = targets[ti];
        cands.push_back(q);
        for (int j = 0; j < 48; ++j) {
          const double s = std::ldexp(1.0, -j);
          if (k.convex()) {
            const Vector& m = members[rng.index(members.size())];
            cands.push_back(q + s * (m - q));
          } else if (curve) {
            auto hits = set_detail::curve_nearest(*curve, q, Norm::l2(), 256, 1);
            const double t = hits.front().t + (rng.uniform() < 0.5 ? -1 : 1) * s * (curve->t_max - curve->t_min) / 64;
            if (t >= curve->t_min && t <= curve->t_max) cands.push_back(curve->map(t));
          }
        }
      }
      std::vector<double> cv;
      for (const auto& c : cands) cv.push_back(norm(x - c));
      double start_gap = 0.0;
      for (double v : cv) start_gap = std::max(start_gap, v - d);
      start_gap = std::max(start_gap, 1e-12);

      std::vector<Vector> pts;
      std::size_t first = 0;
      for (std::size_t i = 1; i < cands.size(); ++i)
        if (cv[i] > cv[first]) first = i;
      pts.push_back(cands[first]);
      double prev_val = cv[first];
      for (int j = 1; j < length; ++j) {
        const double level = d + start_gap * std::pow(10.0, -13.0 * j / (length - 1));
        std::size_t pick = cands.size();
        double far = -1.0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
          if (cv[i] > level || cv[i] > prev_val) continue;
          const double gap = norm(cands[i] - pts.back());
          if (gap > far) {
            far = gap;
            pick = i;
          }
        }
        if (pick == cands.size()) {
          pts.push_back(pts.back());
        } else {
          pts.push_back(cands[pick]);
          prev_val = cv[pick];
        }
      }
      return finish_sequence(std::move(pts), x, norm, d, name);
    }
  }
  throw InvalidArgument("unknown strategy");
}

/// The truncated l1 hull minimizers e_N for each N in `sizes`, embedded in
/// R^{max N}: a minimizing family for x = 0 whose values (N+1)/N fall to 1.
inline MinimizingSequence truncated_hull_sweep(const std::vector<Index>& sizes) {
  if (sizes.size() < 2) throw InvalidArgument("sweep needs at least two truncation sizes");
  const Index top = *std::max_element(sizes.begin(), sizes.end());
  std::vector<Vector> pts;
  for (Index n : sizes) {
    if (n < 1) throw InvalidArgument("truncation sizes must be positive");
    Vector e = Vector::Zero(top);
    e(n - 1) = static_cast<double>(n + 1) / static_cast<double>(n);
    pts.push_back(std::move(e));
  }
  return finish_sequence(std::move(pts), Vector::Zero(top), Norm::l1(), 1.0, "vertex_sweep");
}

// ---------------------------------------------------------------------------
// Uniqueness verdicts

enum class ChebyshevVerdict { ChebyshevEvidence, ProximinalNotUnique, NotProximinalEvidence };

inline const char* to_string(ChebyshevVerdict v) {
  switch (v) {
    case ChebyshevVerdict::ChebyshevEvidence: return "ChebyshevEvidence";
    case ChebyshevVerdict::ProximinalNotUnique: return "ProximinalNotUnique";
    case ChebyshevVerdict::NotProximinalEvidence: return "NotProximinalEvidence";
  }
  return "?";
}

struct ProbeOutcome {
  Vector point;
  double distance = 0.0;
  int cluster_count = 1;
  double cluster_diameter = 0.0;
  bool attained = true;
  bool singleton = true;
};

struct ChebyshevReport {
  std::vector<ProbeOutcome> probes;
  ChebyshevVerdict verdict = ChebyshevVerdict::ChebyshevEvidence;
  std::optional<Vector> witness;
  std::vector<double> gap_trend;  // distances across a truncation family
  int filtered = 0;               // probes dropped for lying in K
};

inline ChebyshevReport chebyshev_verdict(const ClosedSet& k, const Norm& norm, const std::vector<Vector>& probe_points,
                                         const SolverConfig& cfg = {}, double eps = kDefaultArgminSlack) {
  ChebyshevReport rep;
  for (const auto& x : probe_points) {
    if (contains(k, x, 1e-9, norm)) {
      ++rep.filtered;
      continue;
    }
    const auto r = best_approximations(x, k, norm, eps, cfg);
    ProbeOutcome o{x, r.distance, r.cluster_count, r.cluster_diameter, r.attained, r.singleton()};
    if (!o.singleton && !rep.witness) {
      rep.verdict = ChebyshevVerdict::ProximinalNotUnique;
      rep.witness = x;
    }
    rep.probes.push_back(std::move(o));
  }
  if (rep.probes.empty()) throw InvalidArgument("no probe points outside the set");
  return rep;
}

struct FamilyTrend {
  std::vector<Index> sizes;
  std::vector<double> distances;
  std::vector<double> min_gap_to_earlier;  // min over earlier members of the minimizer distance
  double limit_estimate = 0.0;
  bool strictly_decreasing = false;
  bool limit_attained = false;
  double min_pairwise_gap = 0.0;
};

/// Evidence that an increasing family of truncations has no best
/// approximation in the limit: distances decrease strictly toward a limit
/// none of them reaches, while the minimizers stay apart.
inline ChebyshevReport proximinality_trend(const Vector& x, FamilyTrend& trend, const std::vector<Vector>& minimizers,
                                           const Norm& norm, double tol = 1e-9) {
  const std::size_t n = trend.distances.size();
  if (n < 3 || minimizers.size() != n) throw InvalidArgument("family trend needs three or more members");
  trend.strictly_decreasing = true;
  for (std::size_t i = 1; i < n; ++i)
    if (!(trend.distances[i] < trend.distances[i - 1])) trend.strictly_decreasing = false;
  trend.limit_estimate = 2.0 * trend.distances[n - 1] - trend.distances[n - 2];
  const double best = *std::min_element(trend.distances.begin(), trend.distances.end());
  trend.limit_attained = best <= trend.limit_estimate + tol;
  trend.min_gap_to_earlier.assign(n, std::numeric_limits<double>::quiet_NaN());
  trend.min_pairwise_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < i; ++j) {
      const Index dim = std::max(minimizers[i].size(), minimizers[j].size());
      Vector a = Vector::Zero(dim), b = Vector::Zero(dim);
      a.head(minimizers[i].size()) = minimizers[i];
      b.head(minimizers[j].size()) = minimizers[j];
      g = std::min(g, norm(a - b));
    }
    trend.min_gap_to_earlier[i] = g;
    trend.min_pairwise_gap = std::min(trend.min_pairwise_gap, g);
  }
  ChebyshevReport rep;
  rep.gap_trend = trend.distances;
  for (std::size_t i = 0; i < n; ++i) {
    ProbeOutcome o;
    o.point = x;
    o.distance = trend.distances[i];
    rep.probes.push_back(o);
  }
  if (trend.strictly_decreasing && !trend.limit_attained && trend.min_pairwise_gap > tol) {
    rep.verdict = ChebyshevVerdict::NotProximinalEvidence;
    rep.witness = x;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Continuity of the metric projection

struct DiscontinuityWitness {
  Vector a, b;
  Vector projection_a, projection_b;
  double input_gap = 0.0;
  double jump = 0.0;
};

struct ContinuityReport {
  double radius = 0.0;
  int count = 0;
  bool center_singleton = true;
  double center_cluster_diameter = 0.0;
  double modulus_estimate = std::numeric_limits<double>::quiet_NaN();
  std::optional<DiscontinuityWitness> discontinuity_witness;
};

inline ContinuityReport projection_continuity_probe(const ClosedSet& k, const Norm& norm, const Vector& x,
                                                    double radius, int count, std::uint64_t seed,
                                                    const SolverConfig& cfg = {}, double threshold = 10.0) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (count < 2) throw InvalidArgument("count must be at least 2");
  if (contains(k, x, cfg.tolerance, norm)) throw PointInSet();
  ContinuityReport rep;
  rep.radius = radius;
  rep.count = count;
  const auto center = best_approximations(x, k, norm, kDefaultArgminSlack, cfg);
  rep.center_singleton = center.singleton();
  rep.center_cluster_diameter = center.cluster_diameter;
  auto project = [&](const Vector& z) { return distance(z, k, norm, cfg).minimizers.front(); };
  const Vector p0 = project(x);

  Rng rng(seed);
  const double n = static_cast<double>(x.size());
  std::vector<Vector> in, out;
  for (int i = 0; i < count; ++i) {
    const Vector w = set_detail::unit_direction(rng, x.size());
    const double r = radius * std::pow(rng.uniform(), 1.0 / n);
    const Vector z = x + (r / norm(w)) * w;
    if (contains(k, z, cfg.tolerance, norm)) continue;
    in.push_back(z);
    out.push_back(project(z));
  }
  if (rep.center_singleton) {
    double mod = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double gap = norm(in[i] - x);
      if (gap > 0) mod = std::max(mod, norm(out[i] - p0) / gap);
    }
    rep.modulus_estimate = mod;
  }

  double worst = 0.0;
  std::size_t wi = 0, wj = 0;
  for (std::size_t i = 0; i < in.size(); ++i)
    for (std::size_t j = i + 1; j < in.size(); ++j) {
      const double gap = norm(in[i] - in[j]);
      if (gap <= 0) continue;
      const double ratio = norm(out[i] - out[j]) / gap;
      if (ratio > worst) {
        worst = ratio;
        wi = i;
        wj = j;
      }
    }
  if (worst >= threshold) {
    // Shrink the input pair by bisection while keeping the jump.
    Vector a = in[wi], b = in[wj], pa = out[wi], pb = out[wj];
    for (int it = 0; it < 60 && norm(a - b) > 1e-9 * radius; ++it) {
      const Vector m = 0.5 * (a + b);
      if (contains(k, m, cfg.tolerance, norm)) break;
      const Vector pm = project(m);
      if (norm(pm - pa) >= norm(pm - pb)) {
        b = m;
        pb = pm;
      } else {
        a = m;
        pa = pm;
      }
    }
    rep.discontinuity_witness = DiscontinuityWitness{a, b, pa, pb, norm(a - b), norm(pa - pb)};
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Approximative compactness

struct SequenceCompactness {
  bool converges = false;
  std::optional<Vector> limit;
  int cluster_size = 0;
  double min_tail_gap = 0.0;
  bool limit_is_best_approximation = false;  // ||x - limit|| matches the target
};

struct CompactnessReport {
  bool all_converge = true;
  std::vector<SequenceCompactness> sequences;
  std::optional<std::size_t> failure_index;  // first sequence without a Cauchy subsequence
  double failure_gap = 0.0;
};

inline CompactnessReport approximative_compactness_probe(const ClosedSet& k, const Norm& norm, const Vector& x,
                                                         const std::vector<MinimizingSequence>& sequences,
                                                         double cluster_radius = -1.0) {
  if (sequences.empty()) throw InvalidArgument("no sequences given");
  CompactnessReport rep;
  for (std::size_t si = 0; si < sequences.size(); ++si) {
    const auto& seq = sequences[si];
    const double rho = cluster_radius > 0 ? cluster_radius : 1e-3 * (1.0 + seq.target);
    const std::size_t n = seq.points.size();
    const std::size_t start = n / 2;
    std::vector<Vector> tail(seq.points.begin() + static_cast<std::ptrdiff_t>(start), seq.points.end());
    std::vector<Vector> seeds;
    std::vector<int> sizes;
    for (const auto& p : tail) {
      bool placed = false;
      for (std::size_t c = 0; c < seeds.size() && !placed; ++c)
        if (norm(p - seeds[c]) <= rho) {
          ++sizes[c];
          placed = true;
        }
      if (!placed) {
        seeds.push_back(p);
        sizes.push_back(1);
      }
    }
    SequenceCompactness sc;
    sc.min_tail_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tail.size(); ++i)
      for (std::size_t j = i + 1; j < tail.size(); ++j) sc.min_tail_gap = std::min(sc.min_tail_gap, norm(tail[i] - tail[j]));
    const int need = std::max<int>(2, static_cast<int>(tail.size() / 4));
    std::size_t best = 0;
    for (std::size_t c = 1; c < sizes.size(); ++c)
      if (sizes[c] > sizes[best]) best = c;
    sc.cluster_size = sizes.empty() ? 0 : sizes[best];
    if (sc.cluster_size >= need) {
      // Representative: the last tail point of the biggest cluster.
      Vector lim = seeds[best];
      for (const auto& p : tail)
        if (norm(p - seeds[best]) <= rho) lim = p;
      if (lim.size() == k.dim() && contains(k, lim, 1e-7, norm)) {
        sc.converges = true;
        sc.limit = lim;
        sc.limit_is_best_approximation = std::abs(norm(x - lim) - seq.target) <= 1e-6 * (1.0 + seq.target);
      }
    }
    if (!sc.converges) {
      rep.all_converge = false;
      if (!rep.failure_index) {
        rep.failure_index = si;
        rep.failure_gap = sc.min_tail_gap;
      }
    }
    rep.sequences.push_back(std::move(sc));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lipschitz audit of d_K

struct LipschitzReport {
  double max_ratio = 0.0;
  double bound = 1.0;  // 1 + 2 tol / min pair distance
  int pairs = 0;
  int skipped = 0;
  double min_pair_distance = 0.0;
};

/// A box around K: its sampled members padded by half their extent.
inline std::pair<Vector, Vector> bounding_region(const ClosedSet& k, std::uint64_t seed) {
  auto pts = sample_members(k, 200, seed);
  auto b = sample_boundary(k, 64, derive_seed(seed, 1));
  pts.insert(pts.end(), b.begin(), b.end());
  Vector lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vector pad = (0.5 * (hi - lo)).cwiseMax(0.5);
  return {lo - pad, hi + pad};
}

inline LipschitzReport lipschitz_check(const ClosedSet& k, const Norm& norm, int pair_count, std::uint64_t seed,
                                       const SolverConfig& cfg = {}) {
  if (pair_count < 1) throw InvalidArgument("pair count must be positive");
  LipschitzReport rep;
  const auto [lo, hi] = bounding_region(k, derive_seed(seed, "region"));
  const double scale = (hi - lo).maxCoeff();
  Rng rng(seed);
  rep.min_pair_distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < pair_count; ++i) {
    const Vector v = rng.in_box(lo, hi);
    const Vector w = set_detail::unit_direction(rng, v.size());
    const double t = scale * std::pow(10.0, rng.uniform(-3.0, 0.0));
    const Vector u = v + (t / norm(w)) * w;
    const double gap = norm(u - v);
    if (gap == 0.0) {
      ++rep.skipped;
      continue;
    }
    const double du = distance(u, k, norm, cfg).distance;
    const double dv = distance(v, k, norm, cfg).distance;
    rep.max_ratio = std::max(rep.max_ratio, std::abs(du - dv) / gap);
    rep.min_pair_distance = std::min(rep.min_pair_distance, gap);
    ++rep.pairs;
  }
  if (rep.pairs > 0) rep.bound = 1.0 + 2.0 * cfg.tolerance / rep.min_pair_distance;
  return rep;
}

// ---------------------------------------------------------------------------
// Brute force on planar instances: enumerate K on a grid of spacing `step`.

struct GridDistance {
  double distance = std::numeric_limits<double>::infinity();
  Vector point;
  double step = 0.0;
};

inline GridDistance grid_brute_force_distance(const Vector& x, const ClosedSet& k, const Norm& norm, double step) {
  if (k.dim() != 2) throw Unsupported("grid brute force is for planar sets");
  if (!(step > 0)) throw InvalidArgument("grid step must be positive");
  GridDistance g;
  g.step = step;
  auto consider = [&](const Vector& p) {
    const double v = norm(x - p);
    if (v < g.distance) {
      g.distance = v;
      g.point = p;
    }
  };
  auto walk = [&](const Vector& a, const Vector& b) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int j = 0; j <= pieces; ++j) consider(a + (static_cast<double>(j) / pieces) * (b - a));
  };
  constexpr double kTwoPi = 6.283185307179586;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          for (const auto& p : s.points) consider(p);
        } else if constexpr (std::is_same_v<T, Polytope>) {
          if (contains(k, x, 0.0)) {
            g.distance = 0.0;
            g.point = x;
            return;
          }
          for (Index a = 0; a < s.vertices.cols(); ++a)
            for (Index b = a; b < s.vertices.cols(); ++b) walk(s.vertices.col(a), s.vertices.col(b));
        } else if constexpr (std::is_same_v<T, NormBall>) {
          if (s.norm(x - s.center) <= s.radius) {
            g.distance = 0.0;
            g.point = x;
            return;
          }
          const int pieces = std::max(16, static_cast<int>(std::ceil(kTwoPi * 4.0 * s.radius / step)));
          for (int j = 0; j < pieces; ++j) {
            Vector w(2);
            w << std::cos(kTwoPi * j / pieces), std::sin(kTwoPi * j / pieces);
            consider(s.center + (s.radius / s.norm(w)) * w);
          }
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          int pieces = 1024;
          double len = 0.0;
          Vector prev = s.map(s.t_min);
          for (int j = 1; j <= pieces; ++j) {
            Vector p = s.map(s.t_min + (s.t_max - s.t_min) * j / pieces);
            len += (p - prev).norm();
            prev = std::move(p);
          }
          pieces = std::max(pieces, static_cast<int>(std::ceil(4.0 * len / step)));
          for (int j = 0; j <= pieces; ++j) consider(s.map(s.t_min + (s.t_max - s.t_min) * j / pieces));
        } else if constexpr (std::is_same_v<T, SublevelSet>) {
          if (contains(k, x, 0.0)) {
            g.distance = 0.0;
            g.point = x;
            return;
          }
          const double ext = (s.box_hi - s.box_lo).norm();
          const int pieces = std::max(64, static_cast<int>(std::ceil(kTwoPi * 4.0 * ext / step)));
          for (int j = 0; j < pieces; ++j) {
            Vector w(2);
            w << std::cos(kTwoPi * j / pieces), std::sin(kTwoPi * j / pieces);
            consider(set_detail::sublevel_exit(s, w));
          }
        } else {
          for (const auto& part : s.parts) {
            auto r = grid_brute_force_distance(x, part, norm, step);
            if (r.distance < g.distance) {
              g.distance = r.distance;
              g.point = r.point;
            }
          }
        }
      },
      k.rep());
  return g;
}

// ---------------------------------------------------------------------------
// Cross-validation of the available solvers on a convex set.

struct CrossValidation {
  std::vector<std::pair<std::string, double>> distances;  // solver name, value
  double spread = 0.0;
};

inline CrossValidation cross_validate(const Vector& x, const ClosedSet& k, const Norm& norm, SolverConfig cfg = {}) {
  CrossValidation cv;
  for (SolverMethod m : {SolverMethod::ClosedForm, SolverMethod::FrankWolfe, SolverMethod::Subgradient}) {
    cfg.method = m;
    try {
      cv.distances.emplace_back(to_string(m), distance(x, k, norm, cfg).distance);
    } catch (const Unsupported&) {
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [name, d] : cv.distances) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  cv.spread = cv.distances.empty() ? 0.0 : hi - lo;
  return cv;
}

}  // namespace proxlab
