#pragma once

// Geometric probes of a norm's unit ball: strict convexity, the modulus of
// convexity and strongly exposing functionals. All searches are multi-start
// local maximizations from seeded random starts, so verdicts are evidence
// tied to (seed, budget), never proofs.

#include "proxlab/detail/search.hpp"
#include "proxlab/norm.hpp"

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace proxlab {

/// Midpoint-norm threshold for declaring a segment on the unit sphere.
inline constexpr double kFlatMidpointTolerance = 1e-9;
/// Minimal separation of a strict-convexity witness pair.
inline constexpr double kWitnessMinSeparation = 1e-3;

struct StrictConvexityVerdict {
  bool witness_found = false;
  Vector x, y;  // set when witness_found
  double midpoint_norm = 0.0;
  double separation = 0.0;
  int budget = 0;
  int pairs_examined = 0;
};

struct ConvexityReport {
  double epsilon = 0.0;
  double delta_estimate = 0.0;
  std::optional<std::pair<Vector, Vector>> witness_pair;
  int sample_count = 0;
};

struct ExposureVerdict {
  bool exposes = false;
  std::vector<double> etas;
  std::vector<double> max_deviation;  // per eta: max ||z - x|| over the slice
  std::vector<Vector> maximizers;     // the adversarial z per eta
  double lower_bound = 0.0;           // min over eta of max_deviation
  int budget = 0;
};

inline bool is_strict_convexity_witness(const Norm& norm, const Vector& x, const Vector& y) {
  if (std::abs(norm(x) - 1.0) > 1e-9 || std::abs(norm(y) - 1.0) > 1e-9) return false;
  if (norm(x - y) < kWitnessMinSeparation) return false;
  return norm(0.5 * (x + y)) >= 1.0 - kFlatMidpointTolerance;
}

namespace geometry_detail {

inline Vector normalized(const Norm& norm, const Vector& v) { return v / norm(v); }

/// Unit vector y = normalize(x + s v) with ||x - y|| = separation, or nothing
/// when the ray towards v never gets that far from x.
inline std::optional<Vector> partner_at_separation(const Norm& norm, const Vector& x,
                                                   const Vector& v, double separation) {
  constexpr double kFar = 1e8;
  auto sep = [&](double s) -> double {
    const Vector w = x + s * v;
    const double nw = norm(w);
    if (!(nw > 1e-300)) return 2.0;
    return norm(x - w / nw);
  };
  if (sep(kFar) < separation) return std::nullopt;
  const double s = detail::bisect_last_true([&](double t) { return sep(t) < separation; }, 0.0,
                                            kFar, 100);
  const Vector w = x + s * v;
  // Take the side of the crossing that meets the separation constraint.
  Vector y = w / norm(w);
  if (norm(x - y) < separation) {
    const Vector w2 = x + std::nextafter(s, kFar) * v;
    y = w2 / norm(w2);
  }
  return y;
}

struct PairCandidate {
  Vector x, y;
  double midpoint = -1.0;
};

// Search variables: (a, v) in R^{2n}; x = a / ||a||, y = partner of x along v.
inline PairCandidate evaluate_pair(const Norm& norm, const Vector& z, Index dim,
                                   double separation) {
  PairCandidate c;
  const Vector a = z.head(dim);
  const Vector v = z.tail(dim);
  const double na = norm(a);
  if (!(na > 1e-12) || !(v.norm() > 1e-12)) return c;
  c.x = a / na;
  auto y = partner_at_separation(norm, c.x, v, separation);
  if (!y) return c;
  c.y = std::move(*y);
  c.midpoint = norm(0.5 * (c.x + c.y));
  return c;
}

inline PairCandidate best_midpoint_at_separation(const Norm& norm, Index dim, double separation,
                                                 int starts, Rng& rng, int& samples) {
  PairCandidate best;
  for (int s = 0; s < starts; ++s) {
    Vector z(2 * dim);
    z << rng.gaussian(dim), rng.gaussian(dim);
    auto objective = [&](const Vector& w) {
      ++samples;
      return evaluate_pair(norm, w, dim, separation).midpoint;
    };
    auto r = detail::compass_maximize(objective, z, 0.5, 1e-10, 3000);
    auto c = evaluate_pair(norm, r.x, dim, separation);
    if (c.midpoint > best.midpoint) best = std::move(c);
  }
  return best;
}

/// Unit-normalized vectors with entries in {-1, 0, 1}: basis vectors first.
inline std::vector<Vector> structured_directions(const Norm& norm, Index dim) {
  std::vector<std::pair<std::vector<int>, Vector>> keyed;
  Index total = 1;
  for (Index i = 0; i < dim; ++i) total *= 3;
  for (Index code = 0; code < total; ++code) {
    Vector v(dim);
    std::vector<int> key(static_cast<std::size_t>(dim) + 1, 0);
    Index c = code, nnz = 0;
    for (Index i = 0; i < dim; ++i) {
      const int digit = static_cast<int>(c % 3);
      c /= 3;
      v(i) = digit == 0 ? 0.0 : (digit == 1 ? 1.0 : -1.0);
      key[static_cast<std::size_t>(i) + 1] = digit == 1 ? 0 : (digit == 2 ? 1 : 2);
      if (digit != 0) ++nnz;
    }
    if (nnz == 0) continue;
    key[0] = static_cast<int>(nnz);
    keyed.emplace_back(std::move(key), normalized(norm, v));
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vector> out;
  for (auto& k : keyed) out.push_back(std::move(k.second));
  return out;
}

}  // namespace geometry_detail

/// Looks for a segment on the unit sphere: unit x != y whose midpoint also has
/// norm 1. Structured pairs are tried first, then `budget` random starts of a
/// local maximization of ||(x+y)/2|| at fixed separations.
inline StrictConvexityVerdict strict_convexity_probe(const Norm& norm, Index dim,
                                                     std::uint64_t sampler_seed, int budget) {
  if (dim < 2) throw InvalidArgument("strict convexity probe needs dim >= 2");
  if (budget < 1) throw InvalidArgument("budget must be positive");
  if (auto d = norm.dimension(); d && *d != dim) throw DimensionMismatch(*d, dim);

  StrictConvexityVerdict out;
  out.budget = budget;
  auto accept = [&](const Vector& x, const Vector& y) {
    ++out.pairs_examined;
    if (!is_strict_convexity_witness(norm, x, y)) return false;
    out.witness_found = true;
    out.x = x;
    out.y = y;
    out.midpoint_norm = norm(0.5 * (x + y));
    out.separation = norm(x - y);
    return true;
  };

  if (dim <= 4) {
    const auto dirs = geometry_detail::structured_directions(norm, dim);
    for (std::size_t i = 0; i < dirs.size(); ++i)
      for (std::size_t j = i + 1; j < dirs.size(); ++j)
        if (accept(dirs[i], dirs[j])) return out;
  }

  // Separations well above the witness floor: smooth balls flatten at some
  // points (l4 near the axes) and short chords there are nearly flat.
  const std::vector<double> separations = {1.0, 0.5, 0.25, 0.1};
  Rng rng(sampler_seed);
  int samples = 0;
  for (int k = 0; k < budget; ++k) {
    const double sep = separations[static_cast<std::size_t>(k) % separations.size()];
    auto c = geometry_detail::best_midpoint_at_separation(norm, dim, sep, 1, rng, samples);
    if (c.midpoint >= 0.0 && accept(c.x, c.y)) return out;
  }
  return out;
}

/// Upper estimate of the modulus of convexity
///   delta(eps) = inf { 1 - ||(x+y)/2|| : ||x|| = ||y|| = 1, ||x - y|| >= eps }
/// obtained by maximizing the midpoint norm over unit pairs at separation eps.
inline ConvexityReport modulus_of_convexity(const Norm& norm, Index dim, double epsilon,
                                            int budget, std::uint64_t seed) {
  if (!(epsilon > 0.0) || epsilon > 2.0) throw InvalidArgument("epsilon must lie in (0, 2]");
  if (dim < 1) throw InvalidArgument("dimension must be positive");
  if (budget < 1) throw InvalidArgument("budget must be positive");
  if (auto d = norm.dimension(); d && *d != dim) throw DimensionMismatch(*d, dim);

  ConvexityReport rep;
  rep.epsilon = epsilon;
  Rng rng(seed);
  int samples = 0;
  geometry_detail::PairCandidate best;

  // Structured starts: each structured unit vector paired with its partners.
  if (dim <= 4) {
    const auto dirs = geometry_detail::structured_directions(norm, dim);
    for (const auto& a : dirs)
      for (const auto& v : dirs) {
        Vector z(2 * dim);
        z << a, v;
        ++samples;
        auto c = geometry_detail::evaluate_pair(norm, z, dim, epsilon);
        if (c.midpoint > best.midpoint) best = std::move(c);
      }
    if (best.midpoint >= 0.0) {
      Vector z(2 * dim);
      z << best.x, best.y;
      auto r = detail::compass_maximize(
          [&](const Vector& w) {
            ++samples;
            return geometry_detail::evaluate_pair(norm, w, dim, epsilon).midpoint;
          },
          z, 0.25, 1e-10, 3000);
      auto c = geometry_detail::evaluate_pair(norm, r.x, dim, epsilon);
      if (c.midpoint > best.midpoint) best = std::move(c);
    }
  }
  auto c = geometry_detail::best_midpoint_at_separation(norm, dim, epsilon, budget, rng, samples);
  if (c.midpoint > best.midpoint) best = std::move(c);

  rep.sample_count = samples;
  if (best.midpoint < 0.0) {
    rep.delta_estimate = 1.0;
    return rep;
  }
  rep.delta_estimate = std::clamp(1.0 - best.midpoint, 0.0, 1.0);
  rep.witness_pair = std::make_pair(best.x, best.y);
  return rep;
}

/// Default slack schedule for the exposure check: 1e-1 down to 1e-8.
inline std::vector<double> default_eta_schedule() {
  std::vector<double> etas;
  for (double e = 1e-1; e > 5e-9; e *= 0.1) etas.push_back(e);
  return etas;
}

/// Checks whether f strongly exposes the unit ball at x: for each slack eta,
/// adversarially maximizes ||z - x|| over z in B(X) with <f, z> >= <f, x> - eta.
/// The maxima must collapse with eta for ExposesEvidence.
inline ExposureVerdict strongly_exposes_check(const Norm& norm, const DualVector& f,
                                              const Vector& x, std::vector<double> eta_schedule,
                                              int budget, std::uint64_t seed = 0) {
  norm.check_dim(x);
  if (f.dim() != x.size()) throw DimensionMismatch(x.size(), f.dim());
  if (f.coords.isZero(0.0)) throw ZeroFunctional();
  const double nx = norm(x);
  if (std::abs(nx - 1.0) > 1e-9) throw NotOnUnitSphere(nx);
  if (eta_schedule.empty()) throw InvalidArgument("empty eta schedule");
  for (std::size_t i = 0; i < eta_schedule.size(); ++i) {
    if (!(eta_schedule[i] > 0.0)) throw InvalidArgument("eta schedule must be positive");
    if (i > 0 && !(eta_schedule[i] < eta_schedule[i - 1]))
      throw InvalidArgument("eta schedule must be decreasing");
  }
  if (budget < 1) throw InvalidArgument("budget must be positive");

  const Index n = x.size();
  const double radius = std::max(1.0, nx);

  ExposureVerdict out;
  out.etas = eta_schedule;
  out.budget = budget;
  Rng rng(seed);

  // Deterministic starts: coordinate directions and their components in ker f.
  std::vector<Vector> starts;
  const Vector fhat = f.coords / f.coords.norm();
  for (Index i = 0; i < n; ++i) {
    Vector e = Vector::Unit(n, i);
    for (double s : {1.0, -1.0}) {
      starts.push_back(s * e);
      Vector k = s * (e - fhat * fhat.dot(e));
      if (k.norm() > 1e-9) starts.push_back(k / k.norm());
    }
  }
  for (int b = 0; b < budget; ++b) {
    Vector g = rng.gaussian(n);
    starts.push_back(g / g.norm());
  }

  for (double eta : eta_schedule) {
    auto reach = [&](const Vector& d) -> double {
      const double nd = norm(d);
      if (!(nd > 1e-15)) return 0.0;
      double tmax = 2.0 * radius / nd * (1.0 + 1e-9);
      const double fd = f.pair(d);
      if (fd < 0.0) tmax = std::min(tmax, eta / -fd);
      auto inside = [&](double t) { return norm(x + t * d) <= radius; };
      return inside(tmax) ? tmax : detail::bisect_last_true(inside, 0.0, tmax, 64);
    };
    auto deviation = [&](const Vector& d) { return reach(d) * norm(d); };

    double best = -1.0;
    Vector best_z = x;
    for (const auto& s : starts) {
      auto r = detail::compass_maximize(deviation, s, 0.25, 1e-10, 2000);
      if (r.value > best) {
        best = r.value;
        best_z = x + reach(r.x) * r.x;
      }
    }
    out.max_deviation.push_back(best);
    out.maximizers.push_back(best_z);
  }

  out.lower_bound = *std::min_element(out.max_deviation.begin(), out.max_deviation.end());
  const double first = out.max_deviation.front();
  const double last = out.max_deviation.back();
  out.exposes = last <= 0.1 * first && last < 0.1;
  return out;
}

}  // namespace proxlab
