// Copyright 2026 The fogmarket Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

namespace fogmarket::opt {

enum class Sense { minimize, maximize };

/// Dense linear program
///
///   optimize   objective' x
///   subject to ineq * x <= ineq_rhs
///              eq   * x == eq_rhs
///              lower <= x <= upper
///
/// Empty lower/upper default to 0 and +inf.
struct DenseLP {
  Sense sense = Sense::minimize;
  Eigen::VectorXd objective;
  Eigen::MatrixXd ineq;
  Eigen::VectorXd ineq_rhs;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  explicit DenseLP(Eigen::Index num_vars = 0, Sense s = Sense::minimize)
      : sense(s),
        objective(Eigen::VectorXd::Zero(num_vars)),
        ineq(0, num_vars),
        ineq_rhs(0),
        eq(0, num_vars),
        eq_rhs(0),
        lower(Eigen::VectorXd::Zero(num_vars)),
        upper(Eigen::VectorXd::Constant(num_vars, std::numeric_limits<double>::infinity())) {}

  Eigen::Index num_vars() const { return objective.size(); }

  /// Appends a row `coeffs' x <= rhs` and returns its index.
  Eigen::Index add_ineq(const Eigen::VectorXd& coeffs, double rhs) {
    const auto k = ineq.rows();
    ineq.conservativeResize(k + 1, num_vars());
    ineq.row(k) = coeffs.transpose();
    ineq_rhs.conservativeResize(k + 1);
    ineq_rhs(k) = rhs;
    return k;
  }
  Eigen::Index add_eq(const Eigen::VectorXd& coeffs, double rhs) {
    const auto k = eq.rows();
    eq.conservativeResize(k + 1, num_vars());
    eq.row(k) = coeffs.transpose();
    eq_rhs.conservativeResize(k + 1);
    eq_rhs(k) = rhs;
    return k;
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  double value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;
  /// Multipliers of the inequality and equality rows, signed so that the
  /// optimal value equals rhs' duals plus bound contributions. For a
  /// maximization the inequality duals are nonnegative.
  Eigen::VectorXd ineq_duals;
  Eigen::VectorXd eq_duals;
  int iterations = 0;

  bool ok() const { return status == LpStatus::optimal; }
};

struct LpOptions {
  int max_iterations = 0;  // 0: 50 * (rows + cols)
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-10;
  double feasibility_tol = 1e-9;
  int refactor_every = 64;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 40;
};

namespace detail {

// Revised simplex on min c'y, A y = b (b >= 0), y >= 0 with an explicit
// dense basis inverse.
class RevisedSimplex {
 public:
  RevisedSimplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const LpOptions& opts)
      : a_(a), b_(b), opts_(opts), m_(a.rows()), n_(a.cols()) {}

  std::vector<Eigen::Index>& basis() { return basis_; }
  const Eigen::VectorXd& basic_values() const { return xb_; }
  const Eigen::MatrixXd& basis_inverse() const { return binv_; }

  void refactor() {
    Eigen::MatrixXd bm(m_, m_);
    for (Eigen::Index k = 0; k < m_; ++k) bm.col(k) = a_.col(basis_[static_cast<size_t>(k)]);
    binv_ = bm.partialPivLu().inverse();
    xb_ = binv_ * b_;
    for (Eigen::Index k = 0; k < m_; ++k) {
      if (xb_(k) < 0.0 && xb_(k) > -opts_.feasibility_tol) xb_(k) = 0.0;
    }
    since_refactor_ = 0;
  }

  void pivot(Eigen::Index leave, Eigen::Index enter, const Eigen::VectorXd& w) {
    const double theta = xb_(leave) / w(leave);
    xb_ -= theta * w;
    xb_(leave) = theta;
    const Eigen::RowVectorXd pivot_row = binv_.row(leave) / w(leave);
    for (Eigen::Index k = 0; k < m_; ++k) {
      if (k == leave || w(k) == 0.0) continue;
      binv_.row(k) -= w(k) * pivot_row;
    }
    binv_.row(leave) = pivot_row;
    basis_[static_cast<size_t>(leave)] = enter;
    if (++since_refactor_ >= opts_.refactor_every) refactor();
  }

  LpStatus run(const Eigen::VectorXd& c, const std::vector<char>& eligible, int max_iter,
               int& iterations) {
    std::vector<char> in_basis(static_cast<size_t>(n_), 0);
    const double cscale = std::max(1.0, c.cwiseAbs().maxCoeff());
    int degenerate_run = 0;
    while (iterations < max_iter) {
      std::fill(in_basis.begin(), in_basis.end(), 0);
      Eigen::VectorXd cb(m_);
      for (Eigen::Index k = 0; k < m_; ++k) {
        const auto col = basis_[static_cast<size_t>(k)];
        in_basis[static_cast<size_t>(col)] = 1;
        cb(k) = c(col);
      }
      const Eigen::VectorXd y = binv_.transpose() * cb;
      const bool bland = degenerate_run >= opts_.bland_after;

      Eigen::Index enter = -1;
      double best = -opts_.optimality_tol * cscale;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (in_basis[static_cast<size_t>(j)] || !eligible[static_cast<size_t>(j)]) continue;
        const double d = c(j) - a_.col(j).dot(y);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      const Eigen::VectorXd w = binv_ * a_.col(enter);
      Eigen::Index leave = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < m_; ++k) {
        if (w(k) <= opts_.pivot_tol) continue;
        const double ratio = std::max(0.0, xb_(k)) / w(k);
        const bool tie = leave >= 0 && std::abs(ratio - theta) <= 1e-12 * std::max(1.0, theta);
        if (ratio < theta && !tie) {
          theta = ratio;
          leave = k;
        } else if (tie) {
          const bool better = bland ? basis_[static_cast<size_t>(k)] <
                                          basis_[static_cast<size_t>(leave)]
                                    : w(k) > w(leave);
          if (better) {
            theta = std::min(theta, ratio);
            leave = k;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;

      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
      xb_(leave) = std::max(0.0, xb_(leave));
      pivot(leave, enter, w);
      ++iterations;
    }
    return LpStatus::iteration_limit;
  }

 private:
  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& b_;
  LpOptions opts_;
  Eigen::Index m_, n_;
  std::vector<Eigen::Index> basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  int since_refactor_ = 0;
};

// How an original variable maps onto nonnegative standard-form columns.
struct VarMap {
  enum Kind { shifted, mirrored, split } kind;
  double offset;
  Eigen::Index col;
  Eigen::Index col2;
};

}  // namespace detail

/// Two-phase dense revised simplex. Dantzig pricing with a fall back to
/// Bland's rule on long degenerate runs.
inline LpResult solve_lp(const DenseLP& lp, const LpOptions& opts = {}) {
  using Eigen::Index;
  const Index nv = lp.num_vars();
  const double sign = lp.sense == Sense::maximize ? -1.0 : 1.0;

  // Variable transformation to y >= 0.
  std::vector<detail::VarMap> vars(static_cast<size_t>(nv));
  Index ncols = 0;
  std::vector<std::pair<Index, double>> upper_rows;  // (col, bound) for y_col <= bound
  for (Index k = 0; k < nv; ++k) {
    const double lo = lp.lower(k), hi = lp.upper(k);
    auto& v = vars[static_cast<size_t>(k)];
    if (std::isfinite(lo)) {
      v = {detail::VarMap::shifted, lo, ncols++, -1};
      if (std::isfinite(hi)) upper_rows.emplace_back(v.col, hi - lo);
    } else if (std::isfinite(hi)) {
      v = {detail::VarMap::mirrored, hi, ncols++, -1};
    } else {
      v = {detail::VarMap::split, 0.0, ncols, ncols + 1};
      ncols += 2;
    }
  }
  auto expand_row = [&](const Eigen::RowVectorXd& row, double& rhs) {
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(ncols);
    for (Index k = 0; k < nv; ++k) {
      const auto& v = vars[static_cast<size_t>(k)];
      const double coef = row(k);
      if (coef == 0.0) continue;
      switch (v.kind) {
        case detail::VarMap::shifted:
          out(v.col) += coef;
          rhs -= coef * v.offset;
          break;
        case detail::VarMap::mirrored:
          out(v.col) -= coef;
          rhs -= coef * v.offset;
          break;
        case detail::VarMap::split:
          out(v.col) += coef;
          out(v.col2) -= coef;
          break;
      }
    }
    return out;
  };

  const Index n_ineq = lp.ineq.rows();
  const Index n_eq = lp.eq.rows();
  const Index n_ub = static_cast<Index>(upper_rows.size());
  const Index m = n_ineq + n_ub + n_eq;
  const Index n_slack = n_ineq + n_ub;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, ncols + n_slack + m);
  Eigen::VectorXd b(m);
  std::vector<double> row_sign(static_cast<size_t>(m), 1.0);
  for (Index k = 0; k < n_ineq; ++k) {
    double rhs = lp.ineq_rhs(k);
    a.row(k).head(ncols) = expand_row(lp.ineq.row(k), rhs);
    a(k, ncols + k) = 1.0;
    b(k) = rhs;
  }
  for (Index k = 0; k < n_ub; ++k) {
    a(n_ineq + k, upper_rows[static_cast<size_t>(k)].first) = 1.0;
    a(n_ineq + k, ncols + n_ineq + k) = 1.0;
    b(n_ineq + k) = upper_rows[static_cast<size_t>(k)].second;
  }
  for (Index k = 0; k < n_eq; ++k) {
    double rhs = lp.eq_rhs(k);
    a.row(n_slack + k).head(ncols) = expand_row(lp.eq.row(k), rhs);
    b(n_slack + k) = rhs;
  }
  for (Index k = 0; k < m; ++k) {
    if (b(k) < 0.0) {
      a.row(k) = -a.row(k);
      b(k) = -b(k);
      row_sign[static_cast<size_t>(k)] = -1.0;
    }
  }

  Eigen::VectorXd c = Eigen::VectorXd::Zero(ncols + n_slack + m);
  for (Index k = 0; k < nv; ++k) {
    const auto& v = vars[static_cast<size_t>(k)];
    const double ck = sign * lp.objective(k);
    if (v.kind == detail::VarMap::mirrored) {
      c(v.col) = -ck;
    } else {
      c(v.col) = ck;
      if (v.kind == detail::VarMap::split) c(v.col2) = -ck;
    }
  }

  // Artificial columns exist for every row; a row whose slack has +1 after
  // sign normalisation starts with the slack basic instead.
  const Index art0 = ncols + n_slack;
  std::vector<char> needs_art(static_cast<size_t>(m), 1);
  detail::RevisedSimplex simplex(a, b, opts);
  auto& basis = simplex.basis();
  basis.resize(static_cast<size_t>(m));
  for (Index k = 0; k < m; ++k) {
    a(k, art0 + k) = 1.0;
    if (k < n_slack && row_sign[static_cast<size_t>(k)] > 0.0) {
      basis[static_cast<size_t>(k)] = ncols + k;
      needs_art[static_cast<size_t>(k)] = 0;
    } else {
      basis[static_cast<size_t>(k)] = art0 + k;
    }
  }

  const Index ntot = a.cols();
  const int max_iter = opts.max_iterations > 0 ? opts.max_iterations
                                               : static_cast<int>(50 * (m + ntot));
  LpResult result;
  int iterations = 0;
  simplex.refactor();

  // Phase I.
  std::vector<char> eligible(static_cast<size_t>(ntot), 1);
  for (Index k = 0; k < m; ++k) {
    if (!needs_art[static_cast<size_t>(k)]) eligible[static_cast<size_t>(art0 + k)] = 0;
  }
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(ntot);
  bool any_art = false;
  for (Index k = 0; k < m; ++k) {
    if (needs_art[static_cast<size_t>(k)]) {
      c1(art0 + k) = 1.0;
      any_art = true;
    }
  }
  if (any_art) {
    const auto st = simplex.run(c1, eligible, max_iter, iterations);
    if (st == LpStatus::iteration_limit) {
      result.status = st;
      result.iterations = iterations;
      return result;
    }
    simplex.refactor();
    double infeas = 0.0;
    for (Index k = 0; k < m; ++k) {
      if (basis[static_cast<size_t>(k)] >= art0) infeas += simplex.basic_values()(k);
    }
    if (infeas > opts.feasibility_tol * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      result.status = LpStatus::infeasible;
      result.iterations = iterations;
      return result;
    }
    // Drive remaining artificials out of the basis.
    for (Index k = 0; k < m; ++k) {
      if (basis[static_cast<size_t>(k)] < art0) continue;
      const Eigen::RowVectorXd brow = simplex.basis_inverse().row(k);
      for (Index j = 0; j < art0; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        if (std::abs(brow.dot(a.col(j))) > 1e-7) {
          simplex.pivot(k, j, simplex.basis_inverse() * a.col(j));
          break;
        }
      }
    }
    simplex.refactor();
  }

  // Phase II: artificials may never re-enter.
  for (Index k = 0; k < m; ++k) eligible[static_cast<size_t>(art0 + k)] = 0;
  const auto st = simplex.run(c, eligible, max_iter, iterations);
  simplex.refactor();
  result.status = st;
  result.iterations = iterations;
  if (st != LpStatus::optimal) return result;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(ntot);
  for (Index k = 0; k < m; ++k) y(basis[static_cast<size_t>(k)]) = simplex.basic_values()(k);

  result.x.resize(nv);
  for (Index k = 0; k < nv; ++k) {
    const auto& v = vars[static_cast<size_t>(k)];
    switch (v.kind) {
      case detail::VarMap::shifted: result.x(k) = v.offset + y(v.col); break;
      case detail::VarMap::mirrored: result.x(k) = v.offset - y(v.col); break;
      case detail::VarMap::split: result.x(k) = y(v.col) - y(v.col2); break;
    }
  }
  result.value = lp.objective.dot(result.x);

  Eigen::VectorXd cb(m);
  for (Index k = 0; k < m; ++k) cb(k) = c(basis[static_cast<size_t>(k)]);
  const Eigen::VectorXd duals = simplex.basis_inverse().transpose() * cb;
  result.ineq_duals.resize(n_ineq);
  for (Index k = 0; k < n_ineq; ++k) {
    result.ineq_duals(k) = sign * row_sign[static_cast<size_t>(k)] * duals(k);
  }
  result.eq_duals.resize(n_eq);
  for (Index k = 0; k < n_eq; ++k) {
    result.eq_duals(k) =
        sign * row_sign[static_cast<size_t>(n_slack + k)] * duals(n_slack + k);
  }
  return result;
}

}  // namespace fogmarket::opt
