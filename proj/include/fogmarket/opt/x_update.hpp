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

#include "fogmarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace fogmarket::opt {

/// Floor applied to the request total inside the logarithm.
inline constexpr double kLogFloor = 1e-12;

/// One service's proximal step:
///
///   minimize  -weight * ln(sum_j u_j) + (rho / 2) * sum_{j,r} (u_j a(j,r) - center(j,r))^2
///   over      u >= 0, sum_j u_j <= cap
///
/// where u_j is the request rate at node j and a is the service's base demand.
/// Disallowed nodes are pinned to u_j = 0.
struct QuadLogSubproblem {
  double weight = 1.0;
  double rho = 1.0;
  NodeMatrix base_demand;
  std::vector<bool> allowed;  // empty: all nodes
  NodeMatrix center;
  double cap = kInfinity;

  bool allows(std::size_t j) const { return allowed.empty() || allowed[j]; }
};

struct XUpdateResult {
  Eigen::VectorXd rates;  // u_j per node
  NodeMatrix x;           // u_j * a(j, r)
  /// Multiplier of the cap constraint; zero when the cap is slack.
  double cap_multiplier = 0.0;
  double objective = 0.0;
  /// Largest violation of the KKT stationarity conditions at `rates`.
  double stationarity_residual = 0.0;
  bool degenerate = false;
};

inline double x_update_objective(const QuadLogSubproblem& sub, const Eigen::VectorXd& rates) {
  const double total = std::max(rates.sum(), kLogFloor);
  double quad = 0.0;
  for (Eigen::Index j = 0; j < sub.base_demand.rows(); ++j) {
    quad += (rates(j) * sub.base_demand.row(j) - sub.center.row(j)).squaredNorm();
  }
  return -sub.weight * std::log(total) + 0.5 * sub.rho * quad;
}

/// Solves the subproblem exactly.
///
/// Writing alpha_j = |a_j|^2 and beta_j = <a_j, c_j>, stationarity gives
/// u_j(tau) = max(0, (beta_j + tau) / alpha_j) for a shared shift tau, so the
/// total S(tau) is piecewise linear and increasing. Without the cap, tau
/// solves rho * tau * S(tau) = weight, one quadratic per piece; with the cap
/// active, tau solves S(tau) = cap on one linear piece.
inline XUpdateResult solve_x_update(const QuadLogSubproblem& sub) {
  if (!(sub.rho > 0.0)) throw Error("x-update: rho must be positive");
  if (!(sub.weight > 0.0)) throw Error("x-update: weight must be positive");
  if (!(sub.cap > 0.0)) throw Error("x-update: cap must be positive");
  const auto m = sub.base_demand.rows();
  if (sub.center.rows() != m || sub.center.cols() != sub.base_demand.cols()) {
    throw Error("x-update: center shape does not match base demand");
  }

  struct Piece {
    double alpha, beta;
    Eigen::Index node;
  };
  std::vector<Piece> active;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!sub.allows(static_cast<std::size_t>(j))) continue;
    const double alpha = sub.base_demand.row(j).squaredNorm();
    if (alpha <= 0.0) continue;
    active.push_back({alpha, sub.base_demand.row(j).dot(sub.center.row(j)), j});
  }
  XUpdateResult out;
  out.rates = Eigen::VectorXd::Zero(m);
  if (active.empty()) {
    out.degenerate = true;
    out.x = NodeMatrix::Zero(m, sub.base_demand.cols());
    out.objective = x_update_objective(sub, out.rates);
    return out;
  }
  // Nodes switch on in order of decreasing beta, at tau = -beta.
  std::sort(active.begin(), active.end(),
            [](const Piece& l, const Piece& r) { return l.beta > r.beta; });
  const std::size_t n = active.size();
  auto breakpoint = [&](std::size_t k) { return k < n ? -active[k].beta : kInfinity; };

  // total(tau) on piece k (nodes 0..k on) is s0 + s1 * tau.
  std::vector<double> s0(n), s1(n);
  double acc0 = 0.0, acc1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc0 += active[k].beta / active[k].alpha;
    acc1 += 1.0 / active[k].alpha;
    s0[k] = acc0;
    s1[k] = acc1;
  }
  auto total_at = [&](double tau) {
    double s = 0.0;
    for (const auto& p : active) s += std::max(0.0, (p.beta + tau) / p.alpha);
    return s;
  };

  const double target = sub.weight / sub.rho;
  double tau = kInfinity;
  for (std::size_t k = 0; k < n; ++k) {
    const double hi = breakpoint(k + 1);
    // Positive root of s1 tau^2 + s0 tau - target = 0, cancellation-free form.
    const double root = 2.0 * target / (s0[k] + std::sqrt(s0[k] * s0[k] + 4.0 * s1[k] * target));
    if (root <= hi) {
      tau = root;
      break;
    }
  }

  double total = total_at(tau);
  double nu = 0.0;
  if (std::isfinite(sub.cap) && total > sub.cap) {
    for (std::size_t k = 0; k < n; ++k) {
      const double hi = breakpoint(k + 1);
      const double cand = (sub.cap - s0[k]) / s1[k];
      if (cand <= hi) {
        tau = cand;
        break;
      }
    }
    total = sub.cap;
    nu = std::max(0.0, sub.weight / sub.cap - sub.rho * tau);
  }

  for (const auto& p : active) out.rates(p.node) = std::max(0.0, (p.beta + tau) / p.alpha);
  if (std::isfinite(sub.cap) && out.rates.sum() > sub.cap) out.rates *= sub.cap / out.rates.sum();
  out.cap_multiplier = nu;
  out.x = NodeMatrix::Zero(m, sub.base_demand.cols());
  for (const auto& p : active) out.x.row(p.node) = out.rates(p.node) * sub.base_demand.row(p.node);

  const double s = out.rates.sum();
  out.degenerate = s <= kLogFloor;
  const double shift = -sub.weight / std::max(s, kLogFloor) + nu;
  double worst = 0.0;
  for (const auto& p : active) {
    const double g = shift + sub.rho * (p.alpha * out.rates(p.node) - p.beta);
    worst = std::max(worst, out.rates(p.node) > 0.0 ? std::abs(g) : std::max(0.0, -g));
  }
  out.stationarity_residual = worst;
  out.objective = x_update_objective(sub, out.rates);
  return out;
}

}  // namespace fogmarket::opt
