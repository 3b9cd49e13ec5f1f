#pragma once

// Computable norms on R^n: evaluation, derivatives, dual norms.

#include "proxlab/core.hpp"
#include "proxlab/detail/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

namespace proxlab {

enum class NormKind { Lp, WeightedLp, Sup, Polyhedral };

/// Relative tolerance below which a coordinate (or active-functional gap) of
/// an l1 / sup / polyhedral evaluation point counts as a kink.
inline constexpr double kKinkTolerance = 1e-10;

/// A norm on R^n together with the metadata the solvers dispatch on.
///
///  - Lp(p), p in [1, inf)
///  - WeightedLp(p, w): (sum w_i |v_i|^p)^(1/p), w_i > 0
///  - Sup: max |v_i|
///  - Polyhedral(G): max_k |<g_k, v>| over the rows g_k of G, which must span
class Norm {
 public:
  static Norm lp(double p) {
    if (!(p >= 1.0)) throw InvalidArgument("p < 1 does not define a norm");
    if (std::isinf(p)) return sup();
    Norm n;
    n.kind_ = NormKind::Lp;
    n.p_ = p;
    return n;
  }
  static Norm l1() { return lp(1.0); }
  static Norm l2() { return lp(2.0); }
  static Norm sup() {
    Norm n;
    n.kind_ = NormKind::Sup;
    n.p_ = std::numeric_limits<double>::infinity();
    return n;
  }
  static Norm weighted_lp(double p, Vector weights) {
    if (!(p >= 1.0) || std::isinf(p)) throw InvalidArgument("weighted norm needs finite p >= 1");
    if (weights.size() == 0) throw InvalidArgument("weighted norm needs weights");
    if (!weights.allFinite() || (weights.array() <= 0.0).any())
      throw InvalidArgument("weights must be positive and finite");
    Norm n;
    n.kind_ = NormKind::WeightedLp;
    n.p_ = p;
    n.weights_ = std::move(weights);
    return n;
  }
  static Norm polyhedral(Matrix functionals) {
    if (functionals.rows() == 0 || functionals.cols() == 0)
      throw InvalidArgument("polyhedral norm needs at least one functional");
    if (!functionals.allFinite()) throw InvalidArgument("polyhedral functionals must be finite");
    Eigen::ColPivHouseholderQR<Matrix> qr(functionals);
    if (qr.rank() < functionals.cols())
      throw InvalidArgument("polyhedral functionals do not span the space");
    Norm n;
    n.kind_ = NormKind::Polyhedral;
    n.functionals_ = std::move(functionals);
    return n;
  }

  NormKind kind() const { return kind_; }
  double p() const { return p_; }
  const Vector& weights() const { return weights_; }
  const Matrix& functionals() const { return functionals_; }

  /// Fixed dimension for weighted and polyhedral norms; Lp and Sup work in any.
  std::optional<Index> dimension() const {
    if (kind_ == NormKind::WeightedLp) return weights_.size();
    if (kind_ == NormKind::Polyhedral) return functionals_.cols();
    return std::nullopt;
  }

  /// True when the norm is differentiable at every v != 0.
  bool smooth_away_from_zero() const {
    return (kind_ == NormKind::Lp || kind_ == NormKind::WeightedLp) && p_ > 1.0;
  }
  bool strictly_convex() const { return smooth_away_from_zero(); }
  bool is_euclidean() const { return kind_ == NormKind::Lp && p_ == 2.0; }
  /// l1, weighted l1, sup and polyhedral norms: unit ball is a polytope.
  bool is_polyhedral() const { return !smooth_away_from_zero(); }

  void check_dim(const Vector& v) const {
    if (auto d = dimension(); d && *d != v.size()) throw DimensionMismatch(*d, v.size());
  }

  double operator()(const Vector& v) const;
  double dual(const DualVector& f) const;
  DualVector gradient(const Vector& v) const;
  DualVector subgradient(const Vector& v) const;
  double directional_derivative(const Vector& v, const Vector& d) const;
  Vector dual_maximizer(const DualVector& f) const;

  std::string describe() const;

  friend bool operator==(const Norm& a, const Norm& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == NormKind::Sup) return true;
    if (a.p_ != b.p_) return false;
    if (a.weights_.size() != b.weights_.size() || a.weights_ != b.weights_) return false;
    if (a.functionals_.rows() != b.functionals_.rows() ||
        a.functionals_.cols() != b.functionals_.cols())
      return false;
    return a.functionals_ == b.functionals_;
  }

 private:
  Norm() = default;

  // Lp / weighted Lp evaluation, scaled by the largest entry against overflow.
  double lp_eval(const Vector& v) const;

  NormKind kind_ = NormKind::Lp;
  double p_ = 2.0;
  Vector weights_;
  Matrix functionals_;
};

// ---------------------------------------------------------------------------

inline double Norm::lp_eval(const Vector& v) const {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const bool weighted = kind_ == NormKind::WeightedLp;
  if (p_ == 1.0)
    return weighted ? weights_.dot(v.cwiseAbs()) : v.cwiseAbs().sum();
  if (p_ == 2.0 && !weighted) return v.norm();
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double t = std::pow(std::abs(v(i)) / scale, p_);
    acc += weighted ? weights_(i) * t : t;
  }
  return scale * std::pow(acc, 1.0 / p_);
}

inline double Norm::operator()(const Vector& v) const {
  check_dim(v);
  switch (kind_) {
    case NormKind::Lp:
    case NormKind::WeightedLp:
      return v.size() == 0 ? 0.0 : lp_eval(v);
    case NormKind::Sup:
      return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    case NormKind::Polyhedral:
      return (functionals_ * v).cwiseAbs().maxCoeff();
  }
  return 0.0;
}

inline double Norm::dual(const DualVector& f) const {
  const Vector& c = f.coords;
  check_dim(c);
  if (c.size() == 0) return 0.0;
  switch (kind_) {
    case NormKind::Sup:
      return c.cwiseAbs().sum();
    case NormKind::Lp: {
      if (p_ == 1.0) return c.cwiseAbs().maxCoeff();
      if (p_ == 2.0) return c.norm();
      const double q = p_ / (p_ - 1.0);
      return Norm::lp(q)(c);
    }
    case NormKind::WeightedLp: {
      if (p_ == 1.0) return (c.cwiseAbs().array() / weights_.array()).maxCoeff();
      const double q = p_ / (p_ - 1.0);
      const Vector scaled = (c.array() * weights_.array().pow(-1.0 / p_)).matrix();
      return Norm::lp(q)(scaled);
    }
    case NormKind::Polyhedral: {
      // min sum |mu_k|  s.t.  G' mu = f, mu = mu+ - mu-.
      const Index k = functionals_.rows(), n = functionals_.cols();
      detail::LinearProgram lp(2 * k);
      lp.set_objective(Vector::Ones(2 * k));
      for (Index i = 0; i < n; ++i) {
        Eigen::RowVectorXd row(2 * k);
        row << functionals_.col(i).transpose(), -functionals_.col(i).transpose();
        lp.add_row(row, detail::Sense::Equal, c(i));
      }
      const auto sol = lp.minimize();
      if (!sol.optimal()) throw Error("dual norm linear program failed");
      return sol.objective;
    }
  }
  return 0.0;
}

inline DualVector Norm::gradient(const Vector& v) const {
  check_dim(v);
  require_finite(v, "gradient argument");
  const double nv = (*this)(v);
  if (nv == 0.0) throw ZeroVector();
  const Index n = v.size();
  Vector g = Vector::Zero(n);
  const double kink = kKinkTolerance * nv;
  switch (kind_) {
    case NormKind::Lp:
    case NormKind::WeightedLp: {
      const bool weighted = kind_ == NormKind::WeightedLp;
      if (p_ == 1.0) {
        for (Index i = 0; i < n; ++i) {
          if (std::abs(v(i)) < kink)
            throw NonsmoothPoint("zero coordinate " + std::to_string(i) + " of an l1 norm");
          g(i) = (v(i) > 0 ? 1.0 : -1.0) * (weighted ? weights_(i) : 1.0);
        }
        break;
      }
      for (Index i = 0; i < n; ++i) {
        const double t = std::pow(std::abs(v(i)) / nv, p_ - 1.0);
        g(i) = (v(i) >= 0 ? t : -t) * (weighted ? weights_(i) : 1.0);
      }
      break;
    }
    case NormKind::Sup: {
      Index arg = 0;
      double top = -1.0, second = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double a = std::abs(v(i));
        if (a > top) {
          second = top;
          top = a;
          arg = i;
        } else if (a > second) {
          second = a;
        }
      }
      if (n > 1 && top - second < kink) throw NonsmoothPoint("two coordinates attain the sup norm");
      g(arg) = v(arg) > 0 ? 1.0 : -1.0;
      break;
    }
    case NormKind::Polyhedral: {
      const Vector vals = functionals_ * v;
      Index arg = 0;
      double top = -1.0, second = -1.0;
      for (Index k = 0; k < vals.size(); ++k) {
        const double a = std::abs(vals(k));
        if (a > top) {
          second = top;
          top = a;
          arg = k;
        } else if (a > second) {
          second = a;
        }
      }
      if (vals.size() > 1 && top - second < kink)
        throw NonsmoothPoint("two functionals are active");
      g = (vals(arg) > 0 ? 1.0 : -1.0) * functionals_.row(arg).transpose();
      break;
    }
  }
  return DualVector(std::move(g));
}

/// Some element of the subdifferential of the norm at v; the gradient where
/// it exists. Never throws for a finite v.
inline DualVector Norm::subgradient(const Vector& v) const {
  check_dim(v);
  const Index n = v.size();
  const double nv = (*this)(v);
  if (nv == 0.0) return DualVector(Vector::Zero(n));
  if (smooth_away_from_zero()) return gradient(v);
  Vector g = Vector::Zero(n);
  switch (kind_) {
    case NormKind::Lp:
    case NormKind::WeightedLp:
      for (Index i = 0; i < n; ++i) {
        const double w = kind_ == NormKind::WeightedLp ? weights_(i) : 1.0;
        g(i) = v(i) > 0 ? w : (v(i) < 0 ? -w : 0.0);
      }
      break;
    case NormKind::Sup: {
      Index arg;
      v.cwiseAbs().maxCoeff(&arg);
      g(arg) = v(arg) > 0 ? 1.0 : -1.0;
      break;
    }
    case NormKind::Polyhedral: {
      const Vector vals = functionals_ * v;
      Index arg;
      vals.cwiseAbs().maxCoeff(&arg);
      g = (vals(arg) > 0 ? 1.0 : -1.0) * functionals_.row(arg).transpose();
      break;
    }
  }
  return DualVector(std::move(g));
}

/// One-sided derivative lim_{t->0+} (||v + t d|| - ||v||) / t. Exists for every
/// norm, including at kinks and at v = 0.
inline double Norm::directional_derivative(const Vector& v, const Vector& d) const {
  check_dim(v);
  if (v.size() != d.size()) throw DimensionMismatch(v.size(), d.size());
  const double nv = (*this)(v);
  if (nv == 0.0) return (*this)(d);
  const double kink = kKinkTolerance * nv;
  switch (kind_) {
    case NormKind::Lp:
    case NormKind::WeightedLp: {
      if (p_ > 1.0) return gradient(v).pair(d);
      const bool weighted = kind_ == NormKind::WeightedLp;
      double acc = 0.0;
      for (Index i = 0; i < v.size(); ++i) {
        const double w = weighted ? weights_(i) : 1.0;
        if (std::abs(v(i)) < kink)
          acc += w * std::abs(d(i));
        else
          acc += w * (v(i) > 0 ? d(i) : -d(i));
      }
      return acc;
    }
    case NormKind::Sup: {
      double best = -std::numeric_limits<double>::infinity();
      for (Index i = 0; i < v.size(); ++i)
        if (nv - std::abs(v(i)) < kink) best = std::max(best, v(i) > 0 ? d(i) : -d(i));
      return best;
    }
    case NormKind::Polyhedral: {
      const Vector vals = functionals_ * v;
      const Vector dv = functionals_ * d;
      double best = -std::numeric_limits<double>::infinity();
      for (Index k = 0; k < vals.size(); ++k)
        if (nv - std::abs(vals(k)) < kink) best = std::max(best, vals(k) > 0 ? dv(k) : -dv(k));
      return best;
    }
  }
  return 0.0;
}

/// A unit vector z maximizing <f, z> over the unit ball, i.e. <f, z> = ||f||_*.
/// Ties resolve to the lowest coordinate / functional index.
inline Vector Norm::dual_maximizer(const DualVector& f) const {
  const Vector& c = f.coords;
  check_dim(c);
  const Index n = c.size();
  if (c.isZero(0.0)) throw ZeroFunctional();
  Vector z = Vector::Zero(n);
  auto l1_pick = [&](const Vector& ratio, const Vector& scale) {
    Index arg = 0;
    for (Index i = 1; i < n; ++i)
      if (ratio(i) > ratio(arg)) arg = i;
    z(arg) = (c(arg) > 0 ? 1.0 : -1.0) / scale(arg);
  };
  switch (kind_) {
    case NormKind::Sup:
      for (Index i = 0; i < n; ++i) z(i) = c(i) > 0 ? 1.0 : (c(i) < 0 ? -1.0 : 0.0);
      break;
    case NormKind::Lp:
    case NormKind::WeightedLp: {
      const bool weighted = kind_ == NormKind::WeightedLp;
      const Vector w = weighted ? weights_ : Vector::Ones(n);
      if (p_ == 1.0) {
        l1_pick((c.cwiseAbs().array() / w.array()).matrix(), w);
        break;
      }
      const double q = p_ / (p_ - 1.0);
      const Vector cs = (c.array() * w.array().pow(-1.0 / p_)).matrix();
      const double nq = Norm::lp(q)(cs);
      for (Index i = 0; i < n; ++i) {
        const double u = std::pow(std::abs(cs(i)) / nq, q - 1.0);
        z(i) = (cs(i) >= 0 ? u : -u) * std::pow(w(i), -1.0 / p_);
      }
      break;
    }
    case NormKind::Polyhedral: {
      // max <c, z> s.t. -1 <= G z <= 1, z = z+ - z-.
      detail::LinearProgram lp(2 * n);
      Vector obj(2 * n);
      obj << -c, c;
      lp.set_objective(obj);
      for (Index k = 0; k < functionals_.rows(); ++k) {
        Eigen::RowVectorXd row(2 * n);
        row << functionals_.row(k), -functionals_.row(k);
        lp.add_row(row, detail::Sense::LessEq, 1.0);
        lp.add_row(row, detail::Sense::GreaterEq, -1.0);
      }
      const auto sol = lp.minimize();
      if (!sol.optimal()) throw Error("dual maximizer linear program failed");
      z = sol.x.head(n) - sol.x.tail(n);
      break;
    }
  }
  return z;
}

inline std::string Norm::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case NormKind::Lp:
      os << "l" << p_;
      break;
    case NormKind::WeightedLp:
      os << "weighted-l" << p_;
      break;
    case NormKind::Sup:
      os << "sup";
      break;
    case NormKind::Polyhedral:
      os << "polyhedral(" << functionals_.rows() << " functionals)";
      break;
  }
  return os.str();
}

// Free-function spellings of the core operations.

inline double norm_eval(const Norm& norm, const Vector& v) {
  require_finite(v, "vector");
  return norm(v);
}

inline DualVector norm_gradient(const Norm& norm, const Vector& v) { return norm.gradient(v); }

inline double dual_norm(const Norm& norm, const DualVector& f) { return norm.dual(f); }

}  // namespace proxlab
