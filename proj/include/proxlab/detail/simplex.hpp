#pragma once

// Dense two-phase primal simplex. The problems handed to it here are small
// (tens of rows): polyhedral-norm distances, dual norms, membership tests.

#include "proxlab/core.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace proxlab::detail {

enum class Sense { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int pivots = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// min c'x  s.t.  rows (<=, =, >=) rhs,  x >= 0.
class LinearProgram {
 public:
  explicit LinearProgram(Index num_vars) : n_(num_vars), cost_(Vector::Zero(num_vars)) {}

  Index num_vars() const { return n_; }
  Index num_rows() const { return static_cast<Index>(rows_.size()); }

  void set_objective(const Vector& c) {
    if (c.size() != n_) throw DimensionMismatch(n_, c.size());
    cost_ = c;
  }

  void add_row(const Eigen::RowVectorXd& a, Sense sense, double rhs) {
    if (a.size() != n_) throw DimensionMismatch(n_, a.size());
    rows_.push_back(a);
    senses_.push_back(sense);
    rhs_.push_back(rhs);
  }

  LpSolution minimize(int max_pivots = 200000) const;

 private:
  Index n_;
  Vector cost_;
  std::vector<Eigen::RowVectorXd> rows_;
  std::vector<Sense> senses_;
  std::vector<double> rhs_;
};

namespace simplex_impl {

constexpr double kPivotEps = 1e-11;

struct Tableau {
  Matrix t;                  // (m + 1) x (cols + 1); last row costs, last column rhs
  std::vector<Index> basis;  // basic column per row
  std::vector<bool> allowed; // columns permitted to enter

  Index rows() const { return t.rows() - 1; }
  Index cols() const { return t.cols() - 1; }

  void pivot(Index r, Index c) {
    t.row(r) /= t(r, c);
    for (Index i = 0; i < t.rows(); ++i) {
      if (i == r) continue;
      const double f = t(i, c);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
  }

  // Dantzig pricing, switching to Bland's rule after a run of degenerate
  // pivots so cycling cannot occur.
  LpStatus run(int max_pivots, int& pivots) {
    const Index m = rows();
    const Index rhs = cols();
    int degenerate_run = 0;
    bool bland = false;
    for (; pivots < max_pivots; ++pivots) {
      Index enter = -1;
      double best = -kPivotEps;
      for (Index j = 0; j < cols(); ++j) {
        if (!allowed[static_cast<std::size_t>(j)]) continue;
        const double z = t(m, j);
        if (z < best) {
          enter = j;
          if (bland) break;
          best = z;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double a = t(i, enter);
        if (a <= kPivotEps) continue;
        const double q = t(i, rhs) / a;
        if (q < ratio - 1e-14 ||
            (q <= ratio + 1e-14 && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      if (ratio <= 1e-14) {
        if (++degenerate_run > 50) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
    }
    return LpStatus::IterationLimit;
  }
};

}  // namespace simplex_impl

inline LpSolution LinearProgram::minimize(int max_pivots) const {
  using simplex_impl::kPivotEps;
  const Index m = num_rows();
  LpSolution out;

  // Normalize to nonnegative right-hand sides.
  std::vector<Eigen::RowVectorXd> a = rows_;
  std::vector<Sense> sense = senses_;
  std::vector<double> b = rhs_;
  for (Index i = 0; i < m; ++i) {
    auto k = static_cast<std::size_t>(i);
    if (b[k] < 0) {
      a[k] = -a[k];
      b[k] = -b[k];
      if (sense[k] == Sense::LessEq)
        sense[k] = Sense::GreaterEq;
      else if (sense[k] == Sense::GreaterEq)
        sense[k] = Sense::LessEq;
    }
  }

  Index num_slack = 0, num_art = 0;
  for (auto s : sense) {
    if (s != Sense::Equal) ++num_slack;
    if (s != Sense::LessEq) ++num_art;
  }
  const Index cols = n_ + num_slack + num_art;
  simplex_impl::Tableau tab;
  tab.t = Matrix::Zero(m + 1, cols + 1);
  tab.basis.assign(static_cast<std::size_t>(m), -1);
  tab.allowed.assign(static_cast<std::size_t>(cols), true);

  Index slack = n_, art = n_ + num_slack;
  for (Index i = 0; i < m; ++i) {
    auto k = static_cast<std::size_t>(i);
    tab.t.row(i).head(n_) = a[k];
    tab.t(i, cols) = b[k];
    if (sense[k] == Sense::LessEq) {
      tab.t(i, slack) = 1.0;
      tab.basis[k] = slack++;
    } else {
      if (sense[k] == Sense::GreaterEq) tab.t(i, slack++) = -1.0;
      tab.t(i, art) = 1.0;
      tab.basis[k] = art++;
    }
  }

  // Phase 1: minimize the sum of artificials.
  if (num_art > 0) {
    for (Index j = n_ + num_slack; j < cols; ++j) tab.t(m, j) = 1.0;
    for (Index i = 0; i < m; ++i)
      if (tab.basis[static_cast<std::size_t>(i)] >= n_ + num_slack) tab.t.row(m) -= tab.t.row(i);
    const LpStatus st = tab.run(max_pivots, out.pivots);
    if (st == LpStatus::IterationLimit) {
      out.status = st;
      return out;
    }
    double scale = 1.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    if (-tab.t(m, cols) > 1e-9 * scale) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Drive remaining artificials out of the basis where possible.
    for (Index i = 0; i < m; ++i) {
      if (tab.basis[static_cast<std::size_t>(i)] < n_ + num_slack) continue;
      for (Index j = 0; j < n_ + num_slack; ++j) {
        if (std::abs(tab.t(i, j)) > kPivotEps) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (Index j = n_ + num_slack; j < cols; ++j) tab.allowed[static_cast<std::size_t>(j)] = false;
  }

  // Phase 2.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n_) = cost_.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index bi = tab.basis[static_cast<std::size_t>(i)];
    const double cb = bi < n_ ? cost_(bi) : 0.0;
    if (cb != 0.0) tab.t.row(m) -= cb * tab.t.row(i);
  }
  out.status = tab.run(max_pivots, out.pivots);
  out.x = Vector::Zero(n_);
  for (Index i = 0; i < m; ++i) {
    const Index bi = tab.basis[static_cast<std::size_t>(i)];
    if (bi < n_) out.x(bi) = std::max(0.0, tab.t(i, cols));
  }
  out.objective = cost_.dot(out.x);
  return out;
}

}  // namespace proxlab::detail
