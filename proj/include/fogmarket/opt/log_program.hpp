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
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fogmarket::opt {

/// Sparse row a' v <= rhs.
struct SparseRow {
  std::vector<std::pair<Eigen::Index, double>> terms;
  double rhs = 0.0;

  double dot(const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (const auto& [k, c] : terms) s += c * v(k);
    return s;
  }
};

/// maximize   sum_g weight_g * ln(sum_{k in group_g} v_k)
/// subject to rows, v >= 0.
///
/// Groups must be disjoint and nonempty; every variable belongs to at most one.
struct LogProgram {
  Eigen::Index num_vars = 0;
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<double> weights;
  std::vector<SparseRow> rows;
};

struct LogProgramOptions {
  /// Stop when the surrogate duality gap falls below gap_tol * sum(weights).
  double gap_tol = 1e-12;
  double residual_tol = 1e-10;
  int max_iterations = 200;
  double mu = 10.0;
};

struct LogProgramResult {
  Eigen::VectorXd v;
  Eigen::VectorXd row_duals;
  Eigen::VectorXd bound_duals;
  double objective = 0.0;
  double gap = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline double log_program_objective(const LogProgram& prog, const Eigen::VectorXd& v) {
  double f = 0.0;
  for (std::size_t g = 0; g < prog.groups.size(); ++g) {
    double s = 0.0;
    for (auto k : prog.groups[g]) s += v(k);
    f += prog.weights[g] * std::log(s);
  }
  return f;
}

/// A strictly feasible point: every variable at the same level, half way to
/// the tightest row.
inline Eigen::VectorXd log_program_interior_point(const LogProgram& prog) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(prog.num_vars);
  double scale = 1.0;
  for (const auto& row : prog.rows) {
    const double load = row.dot(ones);
    if (load > 0.0) scale = std::min(scale, 0.5 * row.rhs / load);
  }
  return scale * ones;
}

/// Primal-dual interior-point method (path following with backtracking on
/// the residual norm).
inline LogProgramResult solve_log_program(const LogProgram& prog,
                                          const LogProgramOptions& opts = {},
                                          std::optional<Eigen::VectorXd> start = std::nullopt) {
  using Eigen::Index;
  const Index n = prog.num_vars;
  const Index nrow = static_cast<Index>(prog.rows.size());
  const Index mtot = nrow + n;
  if (prog.groups.size() != prog.weights.size()) {
    throw std::invalid_argument("log program: groups and weights differ in length");
  }
  for (const auto& row : prog.rows) {
    if (!(row.rhs > 0.0)) throw std::invalid_argument("log program: rows need positive rhs");
  }

  Eigen::VectorXd v = start ? *start : log_program_interior_point(prog);
  auto slacks = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd s(nrow);
    for (Index k = 0; k < nrow; ++k) s(k) = prog.rows[static_cast<size_t>(k)].rhs -
                                            prog.rows[static_cast<size_t>(k)].dot(x);
    return s;
  };
  Eigen::VectorXd slack = slacks(v);
  if ((v.array() <= 0.0).any() || (slack.array() <= 0.0).any()) {
    throw std::invalid_argument("log program: start point is not strictly feasible");
  }
  Eigen::VectorXd lam = slack.cwiseInverse();
  Eigen::VectorXd lamb = v.cwiseInverse();

  std::vector<Index> group_of(static_cast<size_t>(n), -1);
  for (std::size_t g = 0; g < prog.groups.size(); ++g) {
    for (auto k : prog.groups[g]) group_of[static_cast<size_t>(k)] = static_cast<Index>(g);
  }
  double wsum = 0.0;
  for (double w : prog.weights) wsum += w;

  auto group_totals = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Index>(prog.groups.size()));
    for (Index k = 0; k < n; ++k) {
      const auto g = group_of[static_cast<size_t>(k)];
      if (g >= 0) s(g) += x(k);
    }
    return s;
  };
  // Gradient of the minimised objective -sum w ln s plus row/bound multipliers.
  auto dual_residual = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& l,
                           const Eigen::VectorXd& lb) {
    const Eigen::VectorXd s = group_totals(x);
    Eigen::VectorXd r = -lb;
    for (Index k = 0; k < n; ++k) {
      const auto g = group_of[static_cast<size_t>(k)];
      if (g >= 0) r(k) -= prog.weights[static_cast<size_t>(g)] / s(g);
    }
    for (Index k = 0; k < nrow; ++k) {
      for (const auto& [idx, c] : prog.rows[static_cast<size_t>(k)].terms) r(idx) += c * l(k);
    }
    return r;
  };

  LogProgramResult out;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double eta = lam.dot(slack) + lamb.dot(v);
    const Eigen::VectorXd rd = dual_residual(v, lam, lamb);
    out.iterations = it;
    out.gap = eta;
    out.dual_residual = rd.cwiseAbs().maxCoeff();
    if (eta <= opts.gap_tol * wsum && out.dual_residual <= opts.residual_tol) {
      out.converged = true;
      break;
    }
    const double t = opts.mu * static_cast<double>(mtot) / eta;

    // Centrality residuals, written with F = -slack (rows) and F = -v (bounds).
    const Eigen::VectorXd rc = (lam.array() * slack.array() - 1.0 / t).matrix();
    const Eigen::VectorXd rcb = (lamb.array() * v.array() - 1.0 / t).matrix();

    const Eigen::VectorXd s = group_totals(v);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t g = 0; g < prog.groups.size(); ++g) {
      const double curv = prog.weights[g] / (s(static_cast<Index>(g)) * s(static_cast<Index>(g)));
      for (auto a : prog.groups[g]) {
        for (auto b : prog.groups[g]) h(a, b) += curv;
      }
    }
    Eigen::VectorXd rhs = -rd;
    for (Index k = 0; k < nrow; ++k) {
      const auto& row = prog.rows[static_cast<size_t>(k)];
      const double d = lam(k) / slack(k);
      for (const auto& [a, ca] : row.terms) {
        for (const auto& [b, cb] : row.terms) h(a, b) += d * ca * cb;
        rhs(a) += ca * rc(k) / slack(k);
      }
    }
    for (Index k = 0; k < n; ++k) {
      h(k, k) += lamb(k) / v(k);
      rhs(k) -= rcb(k) / v(k);
    }
    const Eigen::VectorXd dv = h.ldlt().solve(rhs);
    Eigen::VectorXd dl(nrow), dlb(n);
    for (Index k = 0; k < nrow; ++k) {
      const double gdv = prog.rows[static_cast<size_t>(k)].dot(dv);
      dl(k) = (-rc(k) + lam(k) * gdv) / slack(k);
    }
    for (Index k = 0; k < n; ++k) dlb(k) = (-rcb(k) - lamb(k) * dv(k)) / v(k);

    double step = 1.0;
    for (Index k = 0; k < nrow; ++k) {
      if (dl(k) < 0.0) step = std::min(step, -lam(k) / dl(k));
    }
    for (Index k = 0; k < n; ++k) {
      if (dlb(k) < 0.0) step = std::min(step, -lamb(k) / dlb(k));
    }
    step *= 0.99;

    auto residual_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& sl,
                             const Eigen::VectorXd& l, const Eigen::VectorXd& lb) {
      const Eigen::VectorXd r1 = dual_residual(x, l, lb);
      const Eigen::VectorXd r2 = (l.array() * sl.array() - 1.0 / t).matrix();
      const Eigen::VectorXd r3 = (lb.array() * x.array() - 1.0 / t).matrix();
      return std::sqrt(r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm());
    };
    const double r0 = residual_norm(v, slack, lam, lamb);
    Eigen::VectorXd vn, sn, ln, lbn;
    bool accepted = false;
    for (int bt = 0; bt < 60 && !accepted; ++bt) {
      vn = v + step * dv;
      if ((vn.array() > 0.0).all()) {
        sn = slacks(vn);
        if ((sn.array() > 0.0).all()) {
          ln = lam + step * dl;
          lbn = lamb + step * dlb;
          accepted = residual_norm(vn, sn, ln, lbn) <= (1.0 - 0.01 * step) * r0;
        }
      }
      if (!accepted) step *= 0.5;
    }
    if (!accepted) break;
    v = vn;
    slack = sn;
    lam = ln;
    lamb = lbn;
  }
  out.v = v;
  out.row_duals = lam;
  out.bound_duals = lamb;
  out.objective = log_program_objective(prog, v);
  return out;
}

}  // namespace fogmarket::opt
