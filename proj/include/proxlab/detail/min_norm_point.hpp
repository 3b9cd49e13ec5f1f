#pragma once

// Wolfe's minimum-norm-point algorithm: the point of conv{p_1..p_m} closest to
// the origin in the Euclidean norm. Finite active-set method, exact up to
// rounding.

#include "proxlab/core.hpp"

#include <algorithm>
#include <vector>

namespace proxlab::detail {

struct MinNormPoint {
  Vector point;
  Vector weights;  // barycentric weights over the input columns
  int iterations = 0;
};

inline MinNormPoint min_norm_point(const Matrix& pts, int max_iterations = 10000) {
  const Index m = pts.cols();
  if (m == 0) throw InvalidArgument("min norm point of an empty set");
  const double scale = std::max(1.0, pts.colwise().squaredNorm().maxCoeff());
  const double tol = 1e-15 * scale;

  Index first = 0;
  for (Index j = 1; j < m; ++j)
    if (pts.col(j).squaredNorm() < pts.col(first).squaredNorm()) first = j;

  std::vector<Index> corral{first};
  std::vector<double> w{1.0};
  Vector y = pts.col(first);
  MinNormPoint out;

  auto affine_minimizer = [&](const std::vector<Index>& s) {
    const Index k = static_cast<Index>(s.size());
    Matrix a(k + 1, k + 1);
    Vector rhs = Vector::Zero(k + 1);
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < k; ++j)
        a(i, j) = pts.col(s[static_cast<std::size_t>(i)]).dot(pts.col(s[static_cast<std::size_t>(j)]));
      a(i, k) = 1.0;
      a(k, i) = 1.0;
    }
    a(k, k) = 0.0;
    rhs(k) = 1.0;
    Vector sol = a.fullPivLu().solve(rhs);
    return Vector(sol.head(k));
  };

  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    // Major cycle: most improving vertex.
    const Vector dots = pts.transpose() * y;
    Index j;
    const double best = dots.minCoeff(&j);
    if (y.squaredNorm() - best <= tol) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
    corral.push_back(j);
    w.push_back(0.0);

    // Minor cycles: affine minimizer, stepping back into the simplex as needed.
    for (int minor = 0; minor < 1000; ++minor) {
      const Vector alpha = affine_minimizer(corral);
      bool interior = true;
      for (Index i = 0; i < alpha.size(); ++i)
        if (alpha(i) <= 1e-14) interior = false;
      if (interior) {
        for (std::size_t i = 0; i < corral.size(); ++i) w[i] = alpha(static_cast<Index>(i));
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double a = alpha(static_cast<Index>(i));
        if (a <= 1e-14 && w[i] - a > 0) theta = std::min(theta, w[i] / (w[i] - a));
      }
      for (std::size_t i = 0; i < corral.size(); ++i)
        w[i] = (1 - theta) * w[i] + theta * alpha(static_cast<Index>(i));
      std::vector<Index> kept;
      std::vector<double> kept_w;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (w[i] > 1e-14) {
          kept.push_back(corral[i]);
          kept_w.push_back(w[i]);
        }
      }
      if (kept.empty()) {  // numerical corner; restart from the best vertex
        kept.push_back(j);
        kept_w.push_back(1.0);
      }
      corral = std::move(kept);
      w = std::move(kept_w);
      double total = 0.0;
      for (double v : w) total += v;
      for (double& v : w) v /= total;
      if (corral.size() == 1) break;
    }
    y.setZero(pts.rows());
    for (std::size_t i = 0; i < corral.size(); ++i) y += w[i] * pts.col(corral[i]);
  }

  out.point = y;
  out.weights = Vector::Zero(m);
  for (std::size_t i = 0; i < corral.size(); ++i) out.weights(corral[i]) = w[i];
  return out;
}

}  // namespace proxlab::detail
