#pragma once

// Closed subsets of R^n and the oracles the solvers need: membership, linear
// minimization, nearest-point search on non-polytope pieces and seeded
// sampling of boundary points and members.

#include "proxlab/core.hpp"
#include "proxlab/detail/polytope.hpp"
#include "proxlab/detail/search.hpp"
#include "proxlab/norm.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

namespace proxlab {

struct FinitePointSet {
  std::vector<Vector> points;
};

/// Convex hull of the columns of `vertices`.
struct Polytope {
  Matrix vertices;
};

struct NormBall {
  Vector center;
  double radius = 1.0;
  Norm norm = Norm::l2();
};

/// {v in box : g(v) <= level} for a convex g.
struct SublevelSet {
  std::function<double(const Vector&)> function;
  double level = 0.0;
  Vector box_lo, box_hi;
  Vector interior;  // a point with g <= level, found at construction
};

/// Image of [t_min, t_max] under a continuous map. `closed` marks a loop
/// (map(t_min) == map(t_max)).
struct ParametricCurve {
  std::function<Vector(double)> map;
  double t_min = 0.0, t_max = 1.0;
  bool closed = false;
};

class ClosedSet;

struct UnionOf {
  std::vector<ClosedSet> parts;
};

class ClosedSet {
 public:
  using Rep = std::variant<FinitePointSet, Polytope, NormBall, SublevelSet, ParametricCurve, UnionOf>;

  static ClosedSet finite(std::vector<Vector> points);
  static ClosedSet polytope(Matrix vertices);
  static ClosedSet polytope(const std::vector<Vector>& vertices);
  static ClosedSet segment(const Vector& a, const Vector& b);
  static ClosedSet ball(Vector center, double radius, Norm norm);
  static ClosedSet sublevel(std::function<double(const Vector&)> g, double level, Vector box_lo,
                            Vector box_hi, std::uint64_t check_seed = 0);
  static ClosedSet curve(std::function<Vector(double)> map, double t_min, double t_max,
                         bool closed);
  static ClosedSet circle(Vector center, double radius);
  static ClosedSet union_of(std::vector<ClosedSet> parts);
  /// Vertices e_1..e_N of R^N with e_n having n-th entry (n+1)/n.
  static ClosedSet truncated_l1_hull(Index n);

  const Rep& rep() const { return *rep_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(rep_.get());
  }
  Index dim() const { return dim_; }

  /// Convex by construction (polytopes, balls, sublevel sets, single points).
  bool convex() const;
  std::string kind_name() const;

 private:
  ClosedSet(Rep rep, Index dim) : rep_(std::make_shared<const Rep>(std::move(rep))), dim_(dim) {}
  std::shared_ptr<const Rep> rep_;
  Index dim_ = 0;
};

// ---------------------------------------------------------------------------
// Construction

inline ClosedSet ClosedSet::finite(std::vector<Vector> points) {
  if (points.empty()) throw InvalidArgument("finite set needs at least one point");
  const Index n = points.front().size();
  if (n < 1) throw InvalidArgument("points must have positive dimension");
  for (const auto& p : points) {
    if (p.size() != n) throw DimensionMismatch(n, p.size());
    require_finite(p, "point");
  }
  return ClosedSet(FinitePointSet{std::move(points)}, n);
}

inline ClosedSet ClosedSet::polytope(Matrix vertices) {
  if (vertices.cols() == 0 || vertices.rows() == 0)
    throw InvalidArgument("polytope needs at least one vertex");
  if (!vertices.allFinite()) throw InvalidArgument("polytope vertex has non-finite entries");
  const Index n = vertices.rows();
  return ClosedSet(Polytope{std::move(vertices)}, n);
}

inline ClosedSet ClosedSet::polytope(const std::vector<Vector>& vertices) {
  if (vertices.empty()) throw InvalidArgument("polytope needs at least one vertex");
  const Index n = vertices.front().size();
  Matrix v(n, static_cast<Index>(vertices.size()));
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    if (vertices[j].size() != n) throw DimensionMismatch(n, vertices[j].size());
    v.col(static_cast<Index>(j)) = vertices[j];
  }
  return polytope(std::move(v));
}

inline ClosedSet ClosedSet::segment(const Vector& a, const Vector& b) {
  return polytope(std::vector<Vector>{a, b});
}

inline ClosedSet ClosedSet::ball(Vector center, double radius, Norm norm) {
  require_finite(center, "ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive");
  norm.check_dim(center);
  const Index n = center.size();
  return ClosedSet(NormBall{std::move(center), radius, std::move(norm)}, n);
}

namespace set_detail {

/// Largest t >= 0 keeping c + t w inside the box.
inline double box_exit(const Vector& lo, const Vector& hi, const Vector& c, const Vector& w) {
  double t = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < c.size(); ++i) {
    if (w(i) > 0)
      t = std::min(t, (hi(i) - c(i)) / w(i));
    else if (w(i) < 0)
      t = std::min(t, (lo(i) - c(i)) / w(i));
  }
  return std::max(0.0, t);
}

/// Boundary point of a sublevel set along the ray from its interior point.
inline Vector sublevel_exit(const SublevelSet& s, const Vector& w) {
  const Vector& c = s.interior;
  const double tb = box_exit(s.box_lo, s.box_hi, c, w);
  if (!std::isfinite(tb)) return c;
  auto inside = [&](double t) { return s.function(c + t * w) <= s.level; };
  if (inside(tb)) return c + tb * w;
  return c + detail::bisect_last_true(inside, 0.0, tb, 80) * w;
}

inline Vector find_interior(const std::function<double(const Vector&)>& g, const Vector& lo,
                            const Vector& hi, std::uint64_t seed) {
  const Index n = lo.size();
  Vector best = 0.5 * (lo + hi);
  double best_val = g(best);
  auto consider = [&](const Vector& v) {
    const double val = g(v);
    if (val < best_val) {
      best_val = val;
      best = v;
    }
  };
  if (n <= 3) {
    const int r = n == 1 ? 257 : (n == 2 ? 65 : 17);
    Index total = 1;
    for (Index i = 0; i < n; ++i) total *= r;
    Vector v(n);
    for (Index code = 0; code < total; ++code) {
      Index c = code;
      for (Index i = 0; i < n; ++i) {
        v(i) = lo(i) + (hi(i) - lo(i)) * static_cast<double>(c % r) / (r - 1);
        c /= r;
      }
      consider(v);
    }
  } else {
    Rng rng(seed);
    for (int k = 0; k < 4096; ++k) consider(rng.in_box(lo, hi));
  }
  const double width = (hi - lo).maxCoeff();
  auto clamp = [&](const Vector& v) { return Vector(v.cwiseMax(lo).cwiseMin(hi)); };
  auto res = detail::compass_maximize([&](const Vector& v) { return -g(clamp(v)); }, best,
                                      0.05 * width, 1e-12 * (1.0 + width), 20000);
  return clamp(res.x);
}

}  // namespace set_detail

inline ClosedSet ClosedSet::sublevel(std::function<double(const Vector&)> g, double level,
                                     Vector box_lo, Vector box_hi, std::uint64_t check_seed) {
  if (!g) throw InvalidArgument("sublevel set needs a function");
  if (box_lo.size() == 0 || box_hi.size() == 0)
    throw InvalidArgument("sublevel set needs a bounding box");
  if (box_lo.size() != box_hi.size()) throw DimensionMismatch(box_lo.size(), box_hi.size());
  require_finite(box_lo, "box corner");
  require_finite(box_hi, "box corner");
  if ((box_hi - box_lo).minCoeff() <= 0.0) throw InvalidArgument("bounding box is degenerate");
  const Index n = box_lo.size();

  // Midpoint convexity spot check.
  Rng rng(derive_seed(check_seed, "convexity"));
  for (int k = 0; k < 2000; ++k) {
    const Vector a = rng.in_box(box_lo, box_hi), b = rng.in_box(box_lo, box_hi);
    const double ga = g(a), gb = g(b), gm = g(0.5 * (a + b));
    const double scale = 1.0 + std::abs(ga) + std::abs(gb);
    if (gm > 0.5 * (ga + gb) + 1e-9 * scale)
      throw InvalidArgument("sublevel function fails the midpoint convexity check");
  }
  Vector interior = set_detail::find_interior(g, box_lo, box_hi, derive_seed(check_seed, "interior"));
  if (!(g(interior) <= level)) throw InvalidArgument("sublevel set is empty inside its box");
  return ClosedSet(SublevelSet{std::move(g), level, std::move(box_lo), std::move(box_hi),
                               std::move(interior)},
                   n);
}

inline ClosedSet ClosedSet::curve(std::function<Vector(double)> map, double t_min, double t_max,
                                  bool closed) {
  if (!map) throw InvalidArgument("curve needs a map");
  if (!(t_max > t_min) || !std::isfinite(t_min) || !std::isfinite(t_max))
    throw InvalidArgument("curve parameter interval must be nonempty and finite");
  const Vector start = map(t_min);
  const Index n = start.size();
  if (n < 1) throw InvalidArgument("curve must map into a space of positive dimension");
  // Continuity spot check: displacement must shrink as the parameter step does.
  double scale = 0.0;
  for (int k = 0; k <= 16; ++k) {
    const double t = t_min + (t_max - t_min) * k / 16.0;
    const Vector p = map(t);
    if (p.size() != n) throw DimensionMismatch(n, p.size());
    require_finite(p, "curve point");
    scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const double h0 = 1e-2 * (t_max - t_min), h1 = 1e-6 * (t_max - t_min);
    for (double side : {1.0, -1.0}) {
      const double tt = side > 0 ? std::min(t, t_max - h0) : std::max(t, t_min + h0);
      const double j0 = (map(tt + side * h0) - map(tt)).norm();
      const double j1 = (map(tt + side * h1) - map(tt)).norm();
      if (j1 > 0.1 * j0 + 1e-9 * (1.0 + scale))
        throw InvalidArgument("curve map fails the continuity check near t = " + std::to_string(t));
    }
  }
  if (closed && (map(t_max) - start).norm() > 1e-9 * (1.0 + scale))
    throw InvalidArgument("closed curve does not return to its start");
  return ClosedSet(ParametricCurve{std::move(map), t_min, t_max, closed}, n);
}

inline ClosedSet ClosedSet::circle(Vector center, double radius) {
  if (center.size() != 2) throw DimensionMismatch(2, center.size());
  if (!(radius > 0.0)) throw InvalidArgument("circle radius must be positive");
  constexpr double kTwoPi = 6.283185307179586;
  return curve(
      [center, radius](double t) {
        Vector p(2);
        p << center(0) + radius * std::cos(t), center(1) + radius * std::sin(t);
        return p;
      },
      0.0, kTwoPi, true);
}

inline ClosedSet ClosedSet::union_of(std::vector<ClosedSet> parts) {
  if (parts.empty()) throw InvalidArgument("union needs at least one part");
  const Index n = parts.front().dim();
  for (const auto& p : parts)
    if (p.dim() != n) throw DimensionMismatch(n, p.dim());
  return ClosedSet(UnionOf{std::move(parts)}, n);
}

inline ClosedSet ClosedSet::truncated_l1_hull(Index n) {
  if (n < 1) throw InvalidArgument("truncation dimension must be positive");
  Matrix v = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) v(i, i) = static_cast<double>(i + 2) / static_cast<double>(i + 1);
  return polytope(std::move(v));
}

inline bool ClosedSet::convex() const {
  return std::visit(
      [](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) return s.points.size() == 1;
        if constexpr (std::is_same_v<T, Polytope> || std::is_same_v<T, NormBall> ||
                      std::is_same_v<T, SublevelSet>)
          return true;
        if constexpr (std::is_same_v<T, UnionOf>) return s.parts.size() == 1 && s.parts[0].convex();
        return false;
      },
      *rep_);
}

inline std::string ClosedSet::kind_name() const {
  static const char* names[] = {"finite", "polytope", "ball", "sublevel", "curve", "union"};
  return names[rep_->index()];
}

// ---------------------------------------------------------------------------
// Nearest points on individual pieces. Each returns candidate minimizers of
// ||x - y|| sorted by value; the first is the best found.

struct NearPoint {
  Vector point;
  double value = 0.0;
  double t = std::numeric_limits<double>::quiet_NaN();  // curve parameter, when meaningful
};

namespace set_detail {

inline void sort_hits(std::vector<NearPoint>& hits) {
  std::stable_sort(hits.begin(), hits.end(),
                   [](const NearPoint& a, const NearPoint& b) { return a.value < b.value; });
}

/// Grid over the parameter interval followed by golden-section refinement of
/// the best local minima.
inline std::vector<NearPoint> curve_nearest(const ParametricCurve& c, const Vector& x,
                                            const Norm& norm, int grid, int refine = 32) {
  grid = std::max(grid, 8);
  const double h = (c.t_max - c.t_min) / grid;
  const int count = c.closed ? grid : grid + 1;
  std::vector<double> f(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) f[static_cast<std::size_t>(k)] = norm(x - c.map(c.t_min + k * h));
  auto at = [&](int k) {
    if (c.closed) k = ((k % count) + count) % count;
    return f[static_cast<std::size_t>(k)];
  };
  std::vector<int> minima;
  for (int k = 0; k < count; ++k) {
    const bool left = (!c.closed && k == 0) || at(k) <= at(k - 1);
    const bool right = (!c.closed && k == count - 1) || at(k) <= at(k + 1);
    if (left && right) minima.push_back(k);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return at(a) < at(b); });
  if (static_cast<int>(minima.size()) > refine) minima.resize(static_cast<std::size_t>(refine));

  std::vector<NearPoint> hits;
  for (int k : minima) {
    double a = c.t_min + (k - 1) * h, b = c.t_min + (k + 1) * h;
    if (!c.closed) {
      a = std::max(a, c.t_min);
      b = std::min(b, c.t_max);
    }
    auto r = detail::golden_section_min([&](double t) { return norm(x - c.map(t)); }, a, b, 1e-15);
    double t = r.arg;
    if (c.closed) t = c.t_min + std::fmod(std::fmod(t - c.t_min, c.t_max - c.t_min) + (c.t_max - c.t_min), c.t_max - c.t_min);
    hits.push_back({c.map(t), r.value, t});
  }
  sort_hits(hits);
  return hits;
}

/// Best boundary points of a sublevel set over ray directions from the
/// interior point. Returns {x} when x already lies in the set.
inline std::vector<NearPoint> sublevel_nearest(const SublevelSet& s, const Vector& x,
                                               const Norm& norm, int directions,
                                               std::uint64_t seed) {
  const bool in_box = (x.array() >= s.box_lo.array()).all() && (x.array() <= s.box_hi.array()).all();
  if (in_box && s.function(x) <= s.level) return {{x, 0.0}};
  const Index n = x.size();
  auto value = [&](const Vector& w) { return norm(x - sublevel_exit(s, w)); };
  std::vector<NearPoint> hits;
  if (n == 1) {
    for (double sg : {1.0, -1.0}) {
      const Vector w = Vector::Constant(1, sg);
      const Vector p = sublevel_exit(s, w);
      hits.push_back({p, norm(x - p)});
    }
  } else if (n == 2) {
    constexpr double kTwoPi = 6.283185307179586;
    const int g = std::max(directions, 16);
    const double h = kTwoPi / g;
    auto dir = [](double a) {
      Vector w(2);
      w << std::cos(a), std::sin(a);
      return w;
    };
    std::vector<double> f(static_cast<std::size_t>(g));
    for (int k = 0; k < g; ++k) f[static_cast<std::size_t>(k)] = value(dir(k * h));
    std::vector<int> minima;
    for (int k = 0; k < g; ++k) {
      const double l = f[static_cast<std::size_t>((k + g - 1) % g)];
      const double r = f[static_cast<std::size_t>((k + 1) % g)];
      if (f[static_cast<std::size_t>(k)] <= l && f[static_cast<std::size_t>(k)] <= r) minima.push_back(k);
    }
    std::stable_sort(minima.begin(), minima.end(),
                     [&](int a, int b) { return f[static_cast<std::size_t>(a)] < f[static_cast<std::size_t>(b)]; });
    if (minima.size() > 16) minima.resize(16);
    for (int k : minima) {
      auto r = detail::golden_section_min([&](double a) { return value(dir(a)); }, (k - 1) * h,
                                          (k + 1) * h, 1e-15);
      const Vector p = sublevel_exit(s, dir(r.arg));
      hits.push_back({p, norm(x - p)});
    }
  } else {
    Rng rng(seed);
    std::vector<std::pair<double, Vector>> starts;
    const Vector toward = x - s.interior;
    if (toward.norm() > 0) starts.emplace_back(value(toward), toward / toward.norm());
    for (int k = 0; k < directions; ++k) {
      Vector w = rng.gaussian(n);
      w /= w.norm();
      starts.emplace_back(value(w), w);
    }
    std::stable_sort(starts.begin(), starts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (starts.size() > 4) starts.resize(4);
    for (auto& st : starts) {
      auto r = detail::compass_maximize(
          [&](const Vector& w) { return w.norm() > 1e-12 ? -value(w) : -1e300; }, st.second, 0.1,
          1e-12, 4000);
      const Vector p = sublevel_exit(s, r.x);
      hits.push_back({p, norm(x - p)});
    }
  }
  sort_hits(hits);
  return hits;
}

/// Distance from x to a polytope in `norm`, by the most accurate solver
/// available for that norm.
inline detail::PolytopeSolve polytope_distance(const Matrix& v, const Vector& x, const Norm& norm,
                                               double tol = 1e-12, int max_iterations = 20000) {
  if (norm.is_euclidean()) return detail::euclidean_distance(v, x);
  if (norm.is_polyhedral()) return detail::lp_distance(v, x, norm);
  return detail::frank_wolfe(v, x, norm, tol, max_iterations, false);
}

inline detail::PolytopeSolve ball_distance(const NormBall& b, const Vector& x, const Norm& norm,
                                           double tol = 1e-12, int max_iterations = 20000,
                                           bool record_trace = false) {
  const Vector u = x - b.center;
  const double r = b.norm(u);
  Vector radial = r > 0 ? Vector(b.center + (b.radius / r) * u) : b.center;
  if (r <= b.radius) {
    detail::PolytopeSolve out;
    out.point = x;
    out.distance = 0.0;
    out.gap = 0.0;
    out.converged = true;
    if (record_trace) out.trace.push_back(x);
    return out;
  }
  if (norm == b.norm) {
    detail::PolytopeSolve out;
    out.point = radial;
    out.distance = norm(x - radial);
    out.gap = 0.0;
    out.converged = true;
    if (record_trace) out.trace.push_back(radial);
    return out;
  }
  auto lmo = [&](const DualVector& f) -> Vector {
    if (f.coords.isZero(0.0)) return b.center;
    return b.center - b.radius * b.norm.dual_maximizer(f);
  };
  return detail::frank_wolfe_lmo(lmo, x, norm, radial, tol, max_iterations, record_trace);
}

/// Ball measured in a polyhedral norm: cutting planes tangent to the ball.
inline detail::PolytopeSolve ball_cutting_plane(const NormBall& b, const Vector& x, const Norm& norm,
                                                double tol = 1e-12, int max_cuts = 2000,
                                                bool record_trace = false) {
  const Index n = b.center.size();
  if (x.size() != n) throw DimensionMismatch(n, x.size());
  Vector reach(n);
  for (Index i = 0; i < n; ++i) reach(i) = b.radius * b.norm.dual(DualVector(Vector::Unit(n, i))) * (1 + 1e-9);
  auto separate = [&](const Vector& y) -> std::optional<detail::Cut> {
    const Vector u = y - b.center;
    const double r = b.norm(u);
    if (r <= b.radius * (1 + 1e-13)) return std::nullopt;
    const Vector a = b.norm.subgradient(u).coords;
    return detail::Cut{a, b.radius + a.dot(b.center), b.center + (b.radius / r) * u};
  };
  if (b.norm(x - b.center) <= b.radius) return ball_distance(b, x, norm);
  return detail::cutting_plane_distance(separate, x, norm, Vector(b.center - reach), Vector(b.center + reach),
                                        std::max(tol, 1e-13), max_cuts, record_trace);
}

inline detail::PolytopeSolve ball_best(const NormBall& b, const Vector& x, const Norm& norm) {
  if (norm.is_polyhedral() && !(norm == b.norm)) return ball_cutting_plane(b, x, norm);
  return ball_distance(b, x, norm);
}

}  // namespace set_detail

/// Nearest candidates of x in K measured in `norm`; the first entry is the
/// best found. Pieces are searched with their dedicated routines.
inline std::vector<NearPoint> nearest_candidates(const ClosedSet& k, const Vector& x,
                                                 const Norm& norm, int curve_grid = 4096,
                                                 int direction_grid = 720, std::uint64_t seed = 0) {
  if (x.size() != k.dim()) throw DimensionMismatch(k.dim(), x.size());
  std::vector<NearPoint> hits;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          for (const auto& p : s.points) hits.push_back({p, norm(x - p)});
          set_detail::sort_hits(hits);
        } else if constexpr (std::is_same_v<T, Polytope>) {
          auto r = set_detail::polytope_distance(s.vertices, x, norm);
          hits.push_back({r.point, r.distance});
        } else if constexpr (std::is_same_v<T, NormBall>) {
          auto r = set_detail::ball_best(s, x, norm);
          hits.push_back({r.point, r.distance});
        } else if constexpr (std::is_same_v<T, SublevelSet>) {
          hits = set_detail::sublevel_nearest(s, x, norm, direction_grid, seed);
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          hits = set_detail::curve_nearest(s, x, norm, curve_grid);
        } else {
          std::uint64_t c = 0;
          for (const auto& part : s.parts) {
            auto sub = nearest_candidates(part, x, norm, curve_grid, direction_grid, derive_seed(seed, c++));
            hits.insert(hits.end(), sub.begin(), sub.end());
          }
          set_detail::sort_hits(hits);
        }
      },
      k.rep());
  return hits;
}

// ---------------------------------------------------------------------------
// Oracles

/// Whether v lies within `tol` of K, distances measured in `ambient`.
inline bool contains(const ClosedSet& k, const Vector& v, double tol, const Norm& ambient = Norm::l2()) {
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
  if (v.size() != k.dim()) throw DimensionMismatch(k.dim(), v.size());
  require_finite(v, "query point");
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          for (const auto& p : s.points)
            if (ambient(v - p) <= tol) return true;
          return false;
        } else if constexpr (std::is_same_v<T, Polytope>) {
          if (detail::lp_in_hull(s.vertices, v)) return true;
          if (tol == 0.0) return false;
          return set_detail::polytope_distance(s.vertices, v, ambient).distance <= tol;
        } else if constexpr (std::is_same_v<T, NormBall>) {
          if (s.norm(v - s.center) <= s.radius) return true;
          if (tol == 0.0) return false;
          return set_detail::ball_best(s, v, ambient).distance <= tol;
        } else if constexpr (std::is_same_v<T, SublevelSet>) {
          const bool in_box = (v.array() >= s.box_lo.array()).all() && (v.array() <= s.box_hi.array()).all();
          if (in_box && s.function(v) <= s.level) return true;
          if (tol == 0.0) return false;
          return set_detail::sublevel_nearest(s, v, ambient, 720, 0).front().value <= tol;
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          const double eff = std::max(tol, 1e-12 * (1.0 + v.cwiseAbs().maxCoeff()));
          return set_detail::curve_nearest(s, v, ambient, 4096, 8).front().value <= eff;
        } else {
          for (const auto& part : s.parts)
            if (contains(part, v, tol, ambient)) return true;
          return false;
        }
      },
      k.rep());
}

/// argmin over K of <f, y>. Ties go to the lowest point/vertex index.
inline Vector linear_minimization_oracle(const ClosedSet& k, const DualVector& f) {
  if (f.dim() != k.dim()) throw DimensionMismatch(k.dim(), f.dim());
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          std::size_t best = 0;
          double bv = f.pair(s.points[0]);
          for (std::size_t j = 1; j < s.points.size(); ++j) {
            const double val = f.pair(s.points[j]);
            if (val < bv) {
              bv = val;
              best = j;
            }
          }
          return s.points[best];
        } else if constexpr (std::is_same_v<T, Polytope>) {
          return s.vertices.col(detail::argmin_vertex(s.vertices, f.coords));
        } else if constexpr (std::is_same_v<T, NormBall>) {
          if (f.coords.isZero(0.0)) return s.center;
          return s.center - s.radius * s.norm.dual_maximizer(f);
        } else {
          throw Unsupported("linear minimization oracle needs a finite set, polytope or ball");
        }
      },
      k.rep());
}

namespace set_detail {

inline Vector unit_direction(Rng& rng, Index n) {
  Vector w = rng.gaussian(n);
  while (w.norm() == 0.0) w = rng.gaussian(n);
  return w / w.norm();
}

/// Affine dimension of the polytope is below the ambient one: then every
/// member is a boundary point.
inline bool lower_dimensional(const Matrix& v) {
  const Index n = v.rows(), m = v.cols();
  if (m <= n) return true;
  Matrix d = v.rightCols(m - 1).colwise() - v.col(0);
  Eigen::FullPivLU<Matrix> lu(d);
  lu.setThreshold(1e-12);
  return lu.rank() < n;
}

/// Farthest point of the polytope along the ray c + t w, by linear programming.
inline Vector polytope_ray_exit(const Matrix& v, const Vector& c, const Vector& w) {
  const Index n = v.rows(), m = v.cols();
  detail::LinearProgram lp(m + 1);
  Vector obj = Vector::Zero(m + 1);
  obj(m) = -1.0;
  lp.set_objective(obj);
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd row(m + 1);
    row.head(m) = v.row(i);
    row(m) = -w(i);
    lp.add_row(row, detail::Sense::Equal, c(i));
  }
  Eigen::RowVectorXd simplex = Eigen::RowVectorXd::Zero(m + 1);
  simplex.head(m).setOnes();
  lp.add_row(simplex, detail::Sense::Equal, 1.0);
  const auto sol = lp.minimize();
  if (!sol.optimal()) return c;
  Vector lam = sol.x.head(m);
  return v * (lam / lam.sum());
}

}  // namespace set_detail

/// `count` boundary points of K, deterministic in `seed`.
inline std::vector<Vector> sample_boundary(const ClosedSet& k, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("count must be positive");
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          std::vector<std::size_t> order(s.points.size());
          std::iota(order.begin(), order.end(), std::size_t{0});
          std::shuffle(order.begin(), order.end(), rng.engine());
          for (int j = 0; j < count; ++j) out.push_back(s.points[order[static_cast<std::size_t>(j) % order.size()]]);
        } else if constexpr (std::is_same_v<T, Polytope>) {
          const Index m = s.vertices.cols(), n = s.vertices.rows();
          if (set_detail::lower_dimensional(s.vertices)) {
            for (int j = 0; j < count; ++j) out.push_back(s.vertices * rng.simplex(m));
          } else if (m == n + 1) {
            for (int j = 0; j < count; ++j) {
              Vector lam = rng.simplex(m);
              lam(static_cast<Index>(rng.index(static_cast<std::size_t>(m)))) = 0.0;
              out.push_back(s.vertices * (lam / lam.sum()));
            }
          } else {
            const Vector c = s.vertices.rowwise().mean();
            for (int j = 0; j < count; ++j)
              out.push_back(set_detail::polytope_ray_exit(s.vertices, c, set_detail::unit_direction(rng, n)));
          }
        } else if constexpr (std::is_same_v<T, NormBall>) {
          for (int j = 0; j < count; ++j) {
            const Vector w = set_detail::unit_direction(rng, s.center.size());
            out.push_back(s.center + (s.radius / s.norm(w)) * w);
          }
        } else if constexpr (std::is_same_v<T, SublevelSet>) {
          for (int j = 0; j < count; ++j)
            out.push_back(set_detail::sublevel_exit(s, set_detail::unit_direction(rng, s.interior.size())));
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          for (int j = 0; j < count; ++j) out.push_back(s.map(rng.uniform(s.t_min, s.t_max)));
        } else {
          const std::size_t parts = s.parts.size();
          std::vector<int> share(parts, count / static_cast<int>(parts));
          for (std::size_t p = 0; p < static_cast<std::size_t>(count) % parts; ++p) ++share[p];
          std::vector<std::vector<Vector>> per(parts);
          for (std::size_t p = 0; p < parts; ++p)
            if (share[p] > 0) per[p] = sample_boundary(s.parts[p], share[p], derive_seed(seed, p));
          for (int j = 0; j < count; ++j) {
            const std::size_t p = static_cast<std::size_t>(j) % parts;
            out.push_back(per[p][static_cast<std::size_t>(j) / parts]);
          }
        }
      },
      k.rep());
  return out;
}

/// `count` members of K (interior points included), deterministic in `seed`.
/// Finite sets return all their points.
inline std::vector<Vector> sample_members(const ClosedSet& k, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FinitePointSet>) {
          out = s.points;
        } else if constexpr (std::is_same_v<T, Polytope>) {
          const Index m = s.vertices.cols();
          for (int j = 0; j < count; ++j) {
            if (j % 2 == 0) {
              out.push_back(s.vertices * rng.simplex(m));
            } else {
              const auto a = static_cast<Index>(rng.index(static_cast<std::size_t>(m)));
              const auto b = static_cast<Index>(rng.index(static_cast<std::size_t>(m)));
              const double t = rng.uniform();
              out.push_back((1 - t) * s.vertices.col(a) + t * s.vertices.col(b));
            }
          }
        } else if constexpr (std::is_same_v<T, NormBall>) {
          const double n = static_cast<double>(s.center.size());
          for (int j = 0; j < count; ++j) {
            const Vector w = set_detail::unit_direction(rng, s.center.size());
            const double r = s.radius * std::pow(rng.uniform(), 1.0 / n);
            out.push_back(s.center + (r / s.norm(w)) * w);
          }
        } else if constexpr (std::is_same_v<T, SublevelSet>) {
          for (int j = 0; j < count; ++j) {
            const Vector b = set_detail::sublevel_exit(s, set_detail::unit_direction(rng, s.interior.size()));
            out.push_back(s.interior + rng.uniform() * (b - s.interior));
          }
        } else if constexpr (std::is_same_v<T, ParametricCurve>) {
          for (int j = 0; j < count; ++j) out.push_back(s.map(rng.uniform(s.t_min, s.t_max)));
        } else {
          std::uint64_t c = 0;
          const int each = std::max(1, count / static_cast<int>(s.parts.size()));
          for (const auto& part : s.parts) {
            auto sub = sample_members(part, each, derive_seed(seed, c++));
            out.insert(out.end(), sub.begin(), sub.end());
          }
        }
      },
      k.rep());
  return out;
}

}  // namespace proxlab
