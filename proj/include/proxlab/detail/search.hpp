#pragma once

// Derivative-free one- and multi-dimensional search primitives.

#include "proxlab/core.hpp"

#include <cmath>
#include <utility>

namespace proxlab::detail {

/// Largest t in [lo, hi] with pred(t), assuming pred(lo) holds, pred(hi) fails
/// and the true set is an interval starting at lo.
template <class Pred>
double bisect_last_true(Pred&& pred, double lo, double hi, int iterations = 100) {
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

struct ScalarMin {
  double arg = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of a unimodal function on [a, b]. The interval
/// endpoints are always compared so a monotone function returns the exact
/// endpoint.
template <class F>
ScalarMin golden_section_min(F&& f, double a, double b, double tol = 1e-14, int max_iter = 200) {
  constexpr double kInvPhi = 0.6180339887498949;
  const double fa = f(a), fb = f(b);
  double lo = a, hi = b;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < max_iter && (hi - lo) > tol * (1.0 + std::abs(lo) + std::abs(hi)); ++k) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  ScalarMin best{x1, f1};
  if (f2 < best.value) best = {x2, f2};
  if (fa <= best.value) best = {a, fa};
  if (fb < best.value) best = {b, fb};
  return best;
}

struct CompassResult {
  Vector x;
  double value = 0.0;
  int evaluations = 0;
};

/// Compass (coordinate pattern) search maximizing f from x0. The step halves
/// whenever no coordinate move improves.
template <class F>
CompassResult compass_maximize(F&& f, Vector x0, double step, double min_step, int max_evals) {
  CompassResult r{std::move(x0), 0.0, 0};
  r.value = f(r.x);
  r.evaluations = 1;
  const Index n = r.x.size();
  while (step > min_step && r.evaluations < max_evals) {
    bool improved = false;
    for (Index i = 0; i < n && r.evaluations < max_evals; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vector trial = r.x;
        trial(i) += sgn * step;
        const double v = f(trial);
        ++r.evaluations;
        if (v > r.value) {
          r.x = std::move(trial);
          r.value = v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return r;
}

}  // namespace proxlab::detail
