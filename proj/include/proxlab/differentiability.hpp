#pragma once

// Finite-difference calculus of the distance function d_K: directional
// derivatives with Richardson extrapolation, gradient assembly, a sampled
// Frechet test, the gradient/minimizer pairing identity and the convergence
// experiment for minimizing sequences.

#include "proxlab/core.hpp"
#include "proxlab/geometry.hpp"
#include "proxlab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace proxlab {

/// Geometric schedule 1e-2, 1e-3, ..., 1e-6.
inline std::vector<double> default_step_schedule() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

inline SolverConfig differentiation_config() {
  SolverConfig cfg;
  cfg.tolerance = 1e-10;
  return cfg;
}

struct DerivativeEstimate {
  Vector base_point;
  Vector direction;  // unit in the ambient norm
  double direction_scale = 1.0;  // ||z||; estimates below refer to z itself
  std::vector<double> step_schedule;
  std::vector<double> one_sided_values;   // forward quotients
  std::vector<double> backward_values;    // backward quotients
  std::vector<double> symmetric_values;   // central quotients
  double extrapolated = 0.0;
  double forward_limit = 0.0;
  double backward_limit = 0.0;
  double stability_span = 0.0;
  bool one_sided_mismatch = false;  // forward and backward limits disagree
};

namespace diff_detail {

/// Richardson on a quotient sequence with error order `order`.
inline std::vector<double> richardson(const std::vector<double>& q, const std::vector<double>& h, int order) {
  std::vector<double> out;
  for (std::size_t k = 1; k < q.size(); ++k) {
    const double r = std::pow(h[k - 1] / h[k], order);
    out.push_back((r * q[k] - q[k - 1]) / (r - 1.0));
  }
  if (out.empty()) out = q;
  return out;
}

inline double span_last3(const std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t from = n > 3 ? n - 3 : 0;
  const auto [lo, hi] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(from), v.end());
  return *hi - *lo;
}

}  // namespace diff_detail

/// Directional derivative of d_K at x along z.
inline DerivativeEstimate gateaux_derivative_dK(const Vector& x, const Vector& z, const ClosedSet& k, const Norm& norm,
                                                const std::vector<double>& steps = default_step_schedule(),
                                                const SolverConfig& cfg = differentiation_config()) {
  if (x.size() != z.size()) throw DimensionMismatch(x.size(), z.size());
  if (steps.empty()) throw InvalidArgument("empty step schedule");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw InvalidArgument("steps must be positive");
    if (i > 0 && !(steps[i] < steps[i - 1])) throw InvalidArgument("steps must be strictly decreasing");
  }
  if (steps.back() < 10.0 * cfg.tolerance)
    throw InvalidArgument("smallest step must be at least ten times the solver tolerance");
  const double zn = norm(z);
  if (zn == 0.0) throw InvalidArgument("direction is zero");
  if (contains(k, x, cfg.tolerance, norm)) throw PointInSet();

  DerivativeEstimate e;
  e.base_point = x;
  e.direction = z / zn;
  e.direction_scale = zn;
  e.step_schedule = steps;
  auto dk = [&](const Vector& p) { return distance(p, k, norm, cfg).distance; };
  const double d0 = dk(x);
  for (double h : steps) {
    const double fp = dk(x + h * e.direction), fm = dk(x - h * e.direction);
    e.one_sided_values.push_back(zn * (fp - d0) / h);
    e.backward_values.push_back(zn * (d0 - fm) / h);
    e.symmetric_values.push_back(zn * (fp - fm) / (2.0 * h));
  }
  const auto sym = diff_detail::richardson(e.symmetric_values, steps, 2);
  const auto fwd = diff_detail::richardson(e.one_sided_values, steps, 1);
  const auto bwd = diff_detail::richardson(e.backward_values, steps, 1);
  e.extrapolated = sym.back();
  e.forward_limit = fwd.back();
  e.backward_limit = bwd.back();
  e.stability_span = diff_detail::span_last3(sym);
  const double one_sided_span = std::max(diff_detail::span_last3(fwd), diff_detail::span_last3(bwd));
  e.one_sided_mismatch = std::abs(e.forward_limit - e.backward_limit) >
                         10.0 * std::max(e.stability_span, one_sided_span) + 1e-6 * zn;
  return e;
}

struct GradientEstimate {
  DualVector gradient;
  std::vector<DerivativeEstimate> coordinates;
  double stability_span = 0.0;  // worst over coordinates and audit directions
};

/// Gradient of d_K at x from coordinate directional derivatives, audited for
/// linearity on a few seeded random directions.
inline GradientEstimate dK_gradient(const Vector& x, const ClosedSet& k, const Norm& norm,
                                    const std::vector<double>& steps = default_step_schedule(),
                                    const SolverConfig& cfg = differentiation_config(), int audit_directions = 4) {
  const Index n = x.size();
  GradientEstimate g;
  Vector grad(n);
  for (Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    auto est = gateaux_derivative_dK(x, e, k, norm, steps, cfg);
    if (est.one_sided_mismatch)
      throw NonDifferentiablePoint("one-sided derivatives differ along coordinate " + std::to_string(i), e);
    grad(i) = est.extrapolated;
    g.stability_span = std::max(g.stability_span, est.stability_span);
    g.coordinates.push_back(std::move(est));
  }
  Rng rng(derive_seed(cfg.seed, "gradient_audit"));
  for (int a = 0; a < audit_directions; ++a) {
    const Vector w = rng.gaussian(n);
    auto est = gateaux_derivative_dK(x, w, k, norm, steps, cfg);
    if (est.one_sided_mismatch) throw NonDifferentiablePoint("one-sided derivatives differ", w);
    const double pred = grad.dot(w);
    if (std::abs(est.extrapolated - pred) > 10.0 * (est.stability_span + g.stability_span * w.lpNorm<1>()) + 1e-6 * (1.0 + w.lpNorm<1>()))
      throw NonDifferentiablePoint("directional derivative is not linear in the direction", w);
    g.stability_span = std::max(g.stability_span, est.stability_span);
  }
  g.gradient = DualVector(std::move(grad));
  return g;
}

// ---------------------------------------------------------------------------
// Sampled Frechet test: |d(x+y) - d(x) - <g, y>| <= eps ||y|| for ||y|| < delta.

struct FrechetVerdict {
  std::vector<double> epsilon_grid;
  std::vector<double> delta;                  // largest verified radius per epsilon (0 if none)
  std::vector<double> worst_residual;         // max residual / ||y|| at radii <= delta, per epsilon
  std::vector<Vector> worst_direction_per_eps;
  bool uniform = false;
  Vector worst_direction;
  DualVector gradient;
  double stability_span = 0.0;
  int directions = 0;
  std::vector<double> radii;
};

inline int default_direction_budget(Index dim) { return dim <= 3 ? 200 : 1000; }

inline FrechetVerdict frechet_check_dK(const Vector& x, const ClosedSet& k, const Norm& norm,
                                       const std::vector<double>& epsilon_grid = {1e-1, 1e-2, 1e-3},
                                       int direction_budget = 0, std::uint64_t seed = 0,
                                       const SolverConfig& cfg = differentiation_config()) {
  if (epsilon_grid.empty()) throw InvalidArgument("empty epsilon grid");
  for (double e : epsilon_grid)
    if (!(e > 0.0)) throw InvalidArgument("epsilon must be positive");
  const Index n = x.size();
  if (direction_budget <= 0) direction_budget = default_direction_budget(n);
  SolverConfig c = cfg;
  c.seed = derive_seed(seed, "gradient");
  const auto grad = dK_gradient(x, k, norm, default_step_schedule(), c);

  FrechetVerdict v;
  v.epsilon_grid = epsilon_grid;
  v.gradient = grad.gradient;
  v.stability_span = grad.stability_span;
  v.directions = direction_budget;
  auto dk = [&](const Vector& p) { return distance(p, k, norm, cfg).distance; };
  const double d0 = dk(x);
  for (double r = 0.5 * std::max(d0, 1e-3); r >= 1e-6; r *= 0.5) v.radii.push_back(r);
  if (v.radii.empty()) v.radii.push_back(1e-6);

  std::vector<Vector> dirs;
  for (Index i = 0; i < n && static_cast<int>(dirs.size()) < direction_budget; ++i)
    for (double sg : {1.0, -1.0}) {
      Vector e = Vector::Zero(n);
      e(i) = sg;
      dirs.push_back(e);
    }
  Rng rng(seed);
  while (static_cast<int>(dirs.size()) < direction_budget) {
    Vector w = rng.gaussian(n);
    dirs.push_back(w / norm(w));
  }

  const std::size_t ne = epsilon_grid.size(), nr = v.radii.size();
  v.delta.assign(ne, std::numeric_limits<double>::infinity());
  v.worst_residual.assign(ne, 0.0);
  v.worst_direction_per_eps.assign(ne, dirs.front());
  for (const auto& w : dirs) {
    std::vector<double> res(nr);
    for (std::size_t j = 0; j < nr; ++j) {
      const double r = v.radii[j];
      res[j] = std::abs(dk(x + r * w) - d0 - r * grad.gradient.pair(w)) / r;
    }
    for (std::size_t e = 0; e < ne; ++e) {
      // Largest radius from which every smaller sampled radius satisfies eps.
      std::size_t j = nr;
      while (j > 0 && res[j - 1] <= epsilon_grid[e]) --j;
      const double delta = j < nr ? v.radii[j] : 0.0;
      double worst = 0.0;
      for (std::size_t i = j; i < nr; ++i) worst = std::max(worst, res[i]);
      if (delta < v.delta[e] || (delta == v.delta[e] && worst > v.worst_residual[e])) {
        v.delta[e] = delta;
        v.worst_direction_per_eps[e] = w;
      }
      v.worst_residual[e] = std::max(v.worst_residual[e], worst);
    }
  }
  v.uniform = std::all_of(v.delta.begin(), v.delta.end(), [](double d) { return d > 0.0; });
  v.worst_direction = v.worst_direction_per_eps.back();
  return v;
}

// ---------------------------------------------------------------------------
// Gradient / minimizer pairing: <d'_K(x), (x - y)/||x - y||> = 1 for y in P_K(x).

struct UnitResidualReport {
  bool differentiable = true;
  std::optional<Vector> nondifferentiable_direction;
  std::string note;
  DualVector gradient;
  double stability_span = 0.0;
  std::vector<Vector> minimizers;
  std::vector<double> residuals;
  double threshold = 0.0;
  bool pass = false;
};

inline UnitResidualReport lemma1_check(const Vector& x, const ClosedSet& k, const Norm& norm,
                                 const SolverConfig& cfg = differentiation_config()) {
  if (contains(k, x, cfg.tolerance, norm)) throw PointInSet();
  UnitResidualReport rep;
  try {
    const auto g = dK_gradient(x, k, norm, default_step_schedule(), cfg);
    rep.gradient = g.gradient;
    rep.stability_span = g.stability_span;
  } catch (const NonDifferentiablePoint& e) {
    rep.differentiable = false;
    rep.nondifferentiable_direction = e.direction();
    rep.note = e.what();
    return rep;
  }
  const auto ba = best_approximations(x, k, norm, kDefaultArgminSlack, cfg);
  rep.minimizers = ba.minimizers;
  rep.threshold = 1e-5 + 10.0 * rep.stability_span;
  rep.pass = !rep.minimizers.empty();
  for (const auto& y : rep.minimizers) {
    const Vector u = (x - y) / norm(x - y);
    const double r = std::abs(rep.gradient.pair(u) - 1.0);
    rep.residuals.push_back(r);
    if (!(r <= rep.threshold)) rep.pass = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Convergence of minimizing sequences under the differentiability and
// exposure hypotheses.

struct StrategyOutcome {
  std::string strategy;
  Vector limit;
  double final_value = 0.0;
  double tail_diameter = 0.0;
  MinimizingSequence sequence;
};

struct ConvergenceReport {
  double distance = 0.0;
  Vector minimizer;
  bool frechet_ran = false;
  bool frechet_uniform = false;
  std::optional<FrechetVerdict> frechet;
  std::string frechet_note;
  bool exposure_ran = false;
  bool exposes = false;
  std::optional<ExposureVerdict> exposure;
  std::vector<StrategyOutcome> strategies;
  double limit_spread = 0.0;
  bool hypotheses_met = false;
  bool converged = false;  // common limit within 1e-4
  std::string failing_check;
};

inline constexpr double kLimitSpreadTolerance = 1e-4;

inline ConvergenceReport theorem2_convergence_experiment(const Vector& x, const ClosedSet& k, const Norm& norm,
                                                      const std::vector<SequenceStrategy>& strategies,
                                                      const SolverConfig& cfg = differentiation_config(),
                                                      int length = 64, int exposure_budget = 16) {
  if (strategies.empty()) throw InvalidArgument("no sequence strategies given");
  if (contains(k, x, cfg.tolerance, norm)) throw PointInSet();
  ConvergenceReport rep;
  const auto ba = best_approximations(x, k, norm, kDefaultArgminSlack, cfg);
  rep.distance = ba.distance;
  rep.minimizer = ba.minimizers.front();

  try {
    rep.frechet = frechet_check_dK(x, k, norm, {1e-1, 1e-2, 1e-3}, 0, derive_seed(cfg.seed, "frechet"), cfg);
    rep.frechet_ran = true;
    rep.frechet_uniform = rep.frechet->uniform;
  } catch (const NonDifferentiablePoint& e) {
    rep.frechet_ran = true;
    rep.frechet_note = e.what();
  }
  if (rep.frechet) {
    const Vector u = (x - rep.minimizer) / norm(x - rep.minimizer);
    rep.exposure = strongly_exposes_check(norm, rep.frechet->gradient, u, default_eta_schedule(), exposure_budget,
                                          derive_seed(cfg.seed, "exposure"));
    rep.exposure_ran = true;
    rep.exposes = rep.exposure->exposes;
  }
  rep.hypotheses_met = rep.frechet_uniform && rep.exposes;
  if (!rep.frechet_uniform)
    rep.failing_check = "frechet";
  else if (!rep.exposes)
    rep.failing_check = "exposure";

  std::uint64_t c = 0;
  for (auto s : strategies) {
    StrategyOutcome o;
    o.strategy = to_string(s);
    o.sequence = minimizing_sequence(x, k, norm, s, length, derive_seed(cfg.seed, c++), cfg);
    o.limit = o.sequence.points.back();
    o.final_value = o.sequence.values.back();
    o.tail_diameter = o.sequence.cauchy_tail_diameter;
    rep.strategies.push_back(std::move(o));
  }
  for (std::size_t i = 0; i < rep.strategies.size(); ++i)
    for (std::size_t j = i + 1; j < rep.strategies.size(); ++j)
      rep.limit_spread = std::max(rep.limit_spread, norm(rep.strategies[i].limit - rep.strategies[j].limit));
  double worst_tail = 0.0;
  for (const auto& o : rep.strategies) worst_tail = std::max(worst_tail, o.tail_diameter);
  rep.converged = rep.limit_spread < kLimitSpreadTolerance && worst_tail < kLimitSpreadTolerance;
  return rep;
}

}  // namespace proxlab
