#pragma once

// Distance-to-polytope solvers over a vertex (V-) representation:
//  - exact linear programs for polyhedral norms (l1, weighted l1, sup, polyhedral)
//  - Wolfe's active-set method for the Euclidean norm
//  - pairwise Frank-Wolfe for any norm
//  - projected subgradient descent for any norm

#include "proxlab/detail/min_norm_point.hpp"
#include "proxlab/detail/search.hpp"
#include "proxlab/detail/simplex.hpp"
#include "proxlab/norm.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace proxlab::detail {

struct PolytopeSolve {
  double distance = 0.0;
  Vector point;
  Vector weights;
  int iterations = 0;
  double gap = std::numeric_limits<double>::quiet_NaN();  // certified bound when finite
  bool converged = false;
  std::vector<Vector> trace;
};

inline void check_vertices(const Matrix& vertices, const Vector& x) {
  if (vertices.cols() == 0) throw InvalidArgument("polytope has no vertices");
  if (vertices.rows() != x.size()) throw DimensionMismatch(vertices.rows(), x.size());
}

/// Lowest-index minimizer of <f, v_j>.
inline Index argmin_vertex(const Matrix& vertices, const Vector& f) {
  const Vector vals = vertices.transpose() * f;
  Index best = 0;
  for (Index j = 1; j < vals.size(); ++j)
    if (vals(j) < vals(best)) best = j;
  return best;
}

// ---------------------------------------------------------------------------
// Linear programs for polyhedral norms.

namespace lp_model {

/// The convex-combination constraints plus the norm epigraph for
/// ||x - V lambda||, in one of two encodings:
///  l1 family: x - V lambda = p - q, cost sum w_i (p_i + q_i); rows on which
///             x_i - v_ji has one sign for every j are folded into lambda's cost.
///  max family: |<g_k, x - V lambda>| <= t.
struct Model {
  LinearProgram lp{0};
  Index num_lambda = 0;
  Vector norm_cost;  // linear functional of the variables equal to ||x - V lambda||
};

inline bool l1_family(const Norm& norm) {
  return (norm.kind() == NormKind::Lp || norm.kind() == NormKind::WeightedLp) && norm.p() == 1.0;
}

inline Matrix max_functionals(const Norm& norm, Index dim) {
  if (norm.kind() == NormKind::Sup) return Matrix::Identity(dim, dim);
  return norm.functionals();
}

/// Builds the model; when `radius` is set the norm is constrained (<= radius)
/// instead of being the objective.
inline Model build(const Matrix& vertices, const Vector& x, const Norm& norm,
                   std::optional<double> radius) {
  const Index n = vertices.rows(), m = vertices.cols();
  Model md;
  md.num_lambda = m;
  if (l1_family(norm)) {
    const bool weighted = norm.kind() == NormKind::WeightedLp;
    Vector folded = Vector::Zero(m);
    std::vector<Index> kept;
    for (Index i = 0; i < n; ++i) {
      const double w = weighted ? norm.weights()(i) : 1.0;
      bool nonneg = true, nonpos = true;
      for (Index j = 0; j < m; ++j) {
        const double r = x(i) - vertices(i, j);
        if (r < 0) nonneg = false;
        if (r > 0) nonpos = false;
      }
      if (nonneg || nonpos) {
        const double s = nonneg ? 1.0 : -1.0;
        for (Index j = 0; j < m; ++j) folded(j) += w * s * (x(i) - vertices(i, j));
      } else {
        kept.push_back(i);
      }
    }
    const Index k = static_cast<Index>(kept.size());
    md.lp = LinearProgram(m + 2 * k);
    md.norm_cost = Vector::Zero(m + 2 * k);
    md.norm_cost.head(m) = folded;
    for (Index r = 0; r < k; ++r) {
      const Index i = kept[static_cast<std::size_t>(r)];
      const double w = weighted ? norm.weights()(i) : 1.0;
      md.norm_cost(m + r) = w;
      md.norm_cost(m + k + r) = w;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m + 2 * k);
      row.head(m) = vertices.row(i);
      row(m + r) = 1.0;
      row(m + k + r) = -1.0;
      md.lp.add_row(row, Sense::Equal, x(i));
    }
    Eigen::RowVectorXd simplex = Eigen::RowVectorXd::Zero(m + 2 * k);
    simplex.head(m).setOnes();
    md.lp.add_row(simplex, Sense::Equal, 1.0);
    if (radius) md.lp.add_row(md.norm_cost.transpose(), Sense::LessEq, *radius);
    return md;
  }

  const Matrix g = max_functionals(norm, n);
  const Matrix gv = g * vertices;  // K x m
  const Vector gx = g * x;
  const Index nv = radius ? m : m + 1;  // t only when minimizing the norm
  md.lp = LinearProgram(nv);
  md.norm_cost = Vector::Zero(nv);
  if (!radius) md.norm_cost(m) = 1.0;
  for (Index k = 0; k < g.rows(); ++k) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row.head(m) = gv.row(k);
    if (radius) {
      md.lp.add_row(row, Sense::LessEq, gx(k) + *radius);
      md.lp.add_row(row, Sense::GreaterEq, gx(k) - *radius);
    } else {
      row(m) = 1.0;  // <g,V l> + t >= <g,x>
      md.lp.add_row(row, Sense::GreaterEq, gx(k));
      row(m) = -1.0;  // <g,V l> - t <= <g,x>
      md.lp.add_row(row, Sense::LessEq, gx(k));
    }
  }
  Eigen::RowVectorXd simplex = Eigen::RowVectorXd::Zero(nv);
  simplex.head(m).setOnes();
  md.lp.add_row(simplex, Sense::Equal, 1.0);
  return md;
}

}  // namespace lp_model

inline PolytopeSolve lp_distance(const Matrix& vertices, const Vector& x, const Norm& norm) {
  check_vertices(vertices, x);
  if (!norm.is_polyhedral()) throw Unsupported("linear program distance needs a polyhedral norm");
  auto md = lp_model::build(vertices, x, norm, std::nullopt);
  md.lp.set_objective(md.norm_cost);
  const auto sol = md.lp.minimize();
  if (!sol.optimal()) throw Error("distance linear program failed");
  PolytopeSolve out;
  out.weights = sol.x.head(md.num_lambda);
  out.weights /= out.weights.sum();
  out.point = vertices * out.weights;
  out.distance = norm(x - out.point);
  out.iterations = sol.pivots;
  out.gap = std::abs(out.distance - sol.objective);
  out.converged = true;
  return out;
}

/// Point of {y in conv V : ||x - y|| <= radius} minimizing <direction, y>.
inline std::optional<Vector> lp_extent(const Matrix& vertices, const Vector& x, const Norm& norm,
                                       double radius, const Vector& direction) {
  check_vertices(vertices, x);
  auto md = lp_model::build(vertices, x, norm, radius);
  Vector obj = Vector::Zero(md.lp.num_vars());
  obj.head(md.num_lambda) = vertices.transpose() * direction;
  md.lp.set_objective(obj);
  const auto sol = md.lp.minimize();
  if (!sol.optimal()) return std::nullopt;
  Vector w = sol.x.head(md.num_lambda);
  return Vector(vertices * (w / w.sum()));
}

/// Linear-program membership test: is v a convex combination of the vertices?
inline bool lp_in_hull(const Matrix& vertices, const Vector& v) {
  check_vertices(vertices, v);
  const Index m = vertices.cols();
  LinearProgram lp(m);
  for (Index i = 0; i < vertices.rows(); ++i) lp.add_row(vertices.row(i), Sense::Equal, v(i));
  lp.add_row(Eigen::RowVectorXd::Ones(m), Sense::Equal, 1.0);
  return lp.minimize().optimal();
}

// ---------------------------------------------------------------------------
// Euclidean: Wolfe's algorithm on the translated vertices.

inline PolytopeSolve euclidean_distance(const Matrix& vertices, const Vector& x) {
  check_vertices(vertices, x);
  const auto mnp = min_norm_point(vertices.colwise() - x);
  PolytopeSolve out;
  out.weights = mnp.weights;
  out.point = vertices * mnp.weights;
  out.distance = (x - out.point).norm();
  out.iterations = mnp.iterations;
  // Wolfe gap: ||y||^2 - min_j <y, p_j> bounds ||y||^2 - ||y*||^2.
  const Vector y = out.point - x;
  const double worst = ((vertices.colwise() - x).transpose() * y).minCoeff();
  out.gap = std::max(0.0, y.squaredNorm() - worst) / std::max(out.distance, 1e-300);
  out.converged = true;
  return out;
}

inline Vector euclidean_projection(const Matrix& vertices, const Vector& z) {
  return euclidean_distance(vertices, z).point;
}

// ---------------------------------------------------------------------------
// Pairwise Frank-Wolfe on phi(y) = ||x - y||.

inline PolytopeSolve frank_wolfe(const Matrix& vertices, const Vector& x, const Norm& norm,
                                 double tol, int max_iterations, bool record_trace) {
  check_vertices(vertices, x);
  const Index m = vertices.cols();
  PolytopeSolve out;
  out.weights = Vector::Zero(m);
  Index start = 0;
  double start_val = norm(x - vertices.col(0));
  for (Index j = 1; j < m; ++j) {
    const double v = norm(x - vertices.col(j));
    if (v < start_val) {
      start = j;
      start_val = v;
    }
  }
  out.weights(start) = 1.0;
  Vector y = vertices.col(start);
  double phi = start_val;
  if (record_trace) out.trace.push_back(y);

  int stalled = 0;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const Vector u = x - y;
    if (phi == 0.0) {
      out.gap = 0.0;
      out.converged = true;
      break;
    }
    Vector dir;
    double gamma_max = 1.0;
    Index toward = -1, away = -1;
    if (norm.smooth_away_from_zero()) {
      const Vector g = -norm.gradient(u).coords;  // d phi / d y
      toward = argmin_vertex(vertices, g);
      out.gap = g.dot(y - vertices.col(toward));
      if (out.gap <= tol) {
        out.converged = true;
        break;
      }
      double worst = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < m; ++j) {
        if (out.weights(j) <= 0.0) continue;
        const double v = g.dot(vertices.col(j));
        if (v > worst) {
          worst = v;
          away = j;
        }
      }
      if (away >= 0 && away != toward) {
        dir = vertices.col(toward) - vertices.col(away);
        gamma_max = out.weights(away);
      } else {
        away = -1;
        dir = vertices.col(toward) - y;
      }
    } else {
      // Kinks: pick the vertex with the steepest one-sided descent of phi.
      // Any subgradient f at u still bounds phi(y) - d by <f, v - y> over V.
      const Vector f = norm.subgradient(u).coords;
      out.gap = std::max(0.0, (vertices.transpose() * f).maxCoeff() - f.dot(y));
      if (out.gap <= tol) {
        out.converged = true;
        break;
      }
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < m; ++j) {
        const double dd = norm.directional_derivative(u, y - vertices.col(j));
        if (dd < best) {
          best = dd;
          toward = j;
        }
      }
      if (best >= -1e-13) {
        out.converged = out.gap <= 1e3 * tol * (1.0 + phi);
        break;
      }
      dir = vertices.col(toward) - y;
    }

    const auto ls = golden_section_min([&](double g) { return norm(x - (y + g * dir)); }, 0.0,
                                       gamma_max, 1e-15);
    if (ls.value >= phi) {
      if (++stalled >= 3) {
        out.converged = out.gap <= 1e3 * tol * (1.0 + phi);
        break;
      }
      continue;
    }
    stalled = 0;
    const double gamma = ls.arg;
    if (away >= 0) {
      out.weights(toward) += gamma;
      out.weights(away) = std::max(0.0, out.weights(away) - gamma);
      if (gamma >= gamma_max) out.weights(away) = 0.0;
    } else {
      out.weights *= (1.0 - gamma);
      out.weights(toward) += gamma;
    }
    y = vertices * out.weights;
    phi = norm(x - y);
    if (record_trace) out.trace.push_back(y);
  }
  out.point = y;
  out.distance = norm(x - y);
  return out;
}

// ---------------------------------------------------------------------------
// Projected subgradient descent with step halving on stalls. `project` is the
// Euclidean projection onto K.

template <class Project>
PolytopeSolve subgradient_descent(Project&& project, const Vector& x, const Norm& norm,
                                  Vector start, double initial_step, double tol,
                                  int max_iterations, bool record_trace) {
  PolytopeSolve out;
  Vector y = project(start);
  Vector best = y;
  double best_val = norm(x - y);
  double step = initial_step;
  int stall = 0;
  if (record_trace) out.trace.push_back(y);
  constexpr int kPatience = 8;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    if (best_val == 0.0 || step < tol) {
      out.converged = true;
      break;
    }
    const Vector g = -norm.subgradient(x - y).coords;
    const double gn = g.norm();
    if (gn == 0.0) {
      out.converged = true;
      break;
    }
    y = project(y - (step / gn) * g);
    const double val = norm(x - y);
    if (val < best_val) {
      if (val < best_val - 1e-15 * (1.0 + best_val)) stall = 0;
      best_val = val;
      best = y;
      if (record_trace) out.trace.push_back(y);
    } else if (++stall >= kPatience) {
      step *= 0.5;
      stall = 0;
      y = best;
    }
  }
  out.point = best;
  out.distance = best_val;
  return out;
}

// ---------------------------------------------------------------------------
// Classic Frank-Wolfe over any compact convex set given by its linear
// minimization oracle (used for norm balls measured in a foreign norm).

template <class Lmo>
PolytopeSolve frank_wolfe_lmo(Lmo&& lmo, const Vector& x, const Norm& norm, Vector start,
                              double tol, int max_iterations, bool record_trace) {
  PolytopeSolve out;
  Vector y = std::move(start);
  double phi = norm(x - y);
  if (record_trace) out.trace.push_back(y);
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    if (phi == 0.0) {
      out.gap = 0.0;
      out.converged = true;
      break;
    }
    const Vector g = -norm.subgradient(x - y).coords;
    const Vector s = lmo(DualVector(g));
    out.gap = std::max(0.0, g.dot(y - s));
    if (out.gap <= tol) {
      out.converged = true;
      break;
    }
    const Vector dir = s - y;
    const auto ls = golden_section_min([&](double t) { return norm(x - (y + t * dir)); }, 0.0,
                                       1.0, 1e-15);
    if (ls.value >= phi) {
      out.converged = out.gap <= 1e3 * tol * (1.0 + phi);
      break;
    }
    y += ls.arg * dir;
    phi = norm(x - y);
    if (record_trace) out.trace.push_back(y);
  }
  out.point = y;
  out.distance = phi;
  return out;
}

// ---------------------------------------------------------------------------
// Kelley cutting planes for a polyhedral norm over a convex set inside the box
// [lo, hi]. `separate(y)` returns nothing when y lies in K, otherwise a cut
// <a, y> <= b valid on K and a point of K used for the upper bound.

struct Cut {
  Vector a;
  double b = 0.0;
  Vector feasible;
};

template <class Separate>
PolytopeSolve cutting_plane_distance(Separate&& separate, const Vector& x, const Norm& norm,
                                     const Vector& lo, const Vector& hi, double tol,
                                     int max_cuts, bool record_trace) {
  if (!norm.is_polyhedral()) throw Unsupported("cutting planes need a polyhedral norm");
  const Index n = x.size();
  const bool l1 = lp_model::l1_family(norm);
  const bool weighted = norm.kind() == NormKind::WeightedLp;
  const Matrix g = l1 ? Matrix() : lp_model::max_functionals(norm, n);
  const Index nv = l1 ? 3 * n : n + 1;
  LinearProgram lp(nv);
  Vector cost = Vector::Zero(nv);
  const Vector shifted = x - lo;  // variables are w = y - lo >= 0
  if (l1) {
    for (Index i = 0; i < n; ++i) {
      const double w = weighted ? norm.weights()(i) : 1.0;
      cost(n + i) = w;
      cost(2 * n + i) = w;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
      row(i) = 1.0;
      row(n + i) = 1.0;
      row(2 * n + i) = -1.0;
      lp.add_row(row, Sense::Equal, shifted(i));
    }
  } else {
    cost(n) = 1.0;
    const Vector gx = g * shifted;
    for (Index k = 0; k < g.rows(); ++k) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
      row.head(n) = g.row(k);
      row(n) = 1.0;
      lp.add_row(row, Sense::GreaterEq, gx(k));
      row(n) = -1.0;
      lp.add_row(row, Sense::LessEq, gx(k));
    }
  }
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row(i) = 1.0;
    lp.add_row(row, Sense::LessEq, hi(i) - lo(i));
  }
  lp.set_objective(cost);

  PolytopeSolve out;
  double upper = std::numeric_limits<double>::infinity();
  double lower = 0.0;
  for (int it = 0; it < max_cuts; ++it) {
    out.iterations = it + 1;
    const auto sol = lp.minimize();
    if (!sol.optimal()) throw Error("cutting-plane linear program failed");
    lower = std::max(lower, sol.objective);
    const Vector y = lo + sol.x.head(n);
    const auto cut = separate(y);
    if (!cut) {
      out.point = y;
      out.distance = norm(x - y);
      upper = out.distance;
      if (record_trace) out.trace.push_back(y);
      break;
    }
    const double val = norm(x - cut->feasible);
    if (val < upper) {
      upper = val;
      out.point = cut->feasible;
      out.distance = val;
      if (record_trace) out.trace.push_back(cut->feasible);
    }
    if (upper - lower <= tol * (1.0 + upper)) break;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row.head(n) = cut->a.transpose();
    lp.add_row(row, Sense::LessEq, cut->b - cut->a.dot(lo));
  }
  out.gap = std::max(0.0, upper - lower);
  out.converged = out.gap <= tol * (1.0 + upper);
  return out;
}

}  // namespace proxlab::detail
