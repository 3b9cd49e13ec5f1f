#pragma once

// Shared vocabulary: coordinate vectors, dual vectors, error types and the
// seeded random number plumbing every probe in the library draws from.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace proxlab {

/// A point of the coordinate space R^n.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// A continuous linear functional on R^n. Pairs with a Vector by the
/// coordinate dot product; kept as a distinct type so primal and dual
/// quantities are not mixed up silently.
struct DualVector {
  Vector coords;

  DualVector() = default;
  explicit DualVector(Vector c) : coords(std::move(c)) {}

  Index dim() const { return coords.size(); }
  double pair(const Vector& v) const;
};

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(Index expected, Index got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error("norm derivative requested at the zero vector") {}
};

class NonsmoothPoint : public Error {
 public:
  explicit NonsmoothPoint(const std::string& what) : Error("nonsmooth point: " + what) {}
};

class ZeroFunctional : public Error {
 public:
  ZeroFunctional() : Error("functional is zero") {}
};

class NotOnUnitSphere : public Error {
 public:
  explicit NotOnUnitSphere(double norm)
      : Error("point is not on the unit sphere (norm " + std::to_string(norm) + ")") {}
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Raised when an operation that needs x outside K is handed a point of K.
class PointInSet : public Error {
 public:
  PointInSet() : Error("point lies in the set; distance is zero") {}
};

/// Finite differences detected a point where the distance function has no
/// Gateaux derivative. `direction` is the offending direction.
class NonDifferentiablePoint : public Error {
 public:
  NonDifferentiablePoint(const std::string& what, Vector direction)
      : Error("not Gateaux differentiable: " + what), direction_(std::move(direction)) {}
  const Vector& direction() const { return direction_; }

 private:
  Vector direction_;
};

// ---------------------------------------------------------------------------
// Helpers

inline double DualVector::pair(const Vector& v) const {
  if (v.size() != coords.size()) throw DimensionMismatch(coords.size(), v.size());
  return coords.dot(v);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

inline Vector make_vector(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vector to_vector(const std::vector<double>& xs) {
  return Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size()));
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------------------
// Randomness. Every stochastic routine takes an explicit seed; sub-streams are
// derived with a counter so reruns reproduce witnesses exactly.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(seed ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return derive_seed(seed, h);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Vector gaussian(Index dim) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = normal();
    return v;
  }

  /// Uniform point of the box [lo, hi].
  Vector in_box(const Vector& lo, const Vector& hi) {
    Vector v(lo.size());
    for (Index i = 0; i < lo.size(); ++i) v(i) = uniform(lo(i), hi(i));
    return v;
  }

  /// Random point of the probability simplex (flat Dirichlet).
  Vector simplex(Index n) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = -std::log(1.0 - uniform());
    return w / w.sum();
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace proxlab
