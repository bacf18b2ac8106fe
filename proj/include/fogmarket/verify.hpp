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

#include "fogmarket/equilibrium.hpp"
#include "fogmarket/opt/lp.hpp"

#include <string>
#include <vector>

namespace fogmarket {

/// Outcome of one equilibrium condition. `worst` is the largest realized
/// violation (0 when the condition holds exactly).
struct CheckResult {
  bool pass = true;
  double worst = 0.0;
  std::string detail;

  void record(double violation, double tol, const std::string& where) {
    if (violation > worst) worst = violation;
    if (violation > tol) {
      if (pass) detail = where;
      pass = false;
    }
  }
};

struct ServiceAudit {
  double budget = 0.0;
  double spend = 0.0;
  double utility = 0.0;      // truncated at the limit
  double raw_utility = 0.0;  // sum of per-node Leontief utilities
  double utility_limit = kInfinity;
  double cheapest_bundle_price = kInfinity;
  /// Cost of the same utility bought only at the cheapest node.
  double frugal_spend = 0.0;
  /// Best utility affordable at the given prices (LP oracle).
  double best_response_utility = 0.0;
  /// Limit multiplier implied by stationarity at the cheapest node.
  double kkt_mu = 0.0;
  double reported_mu = 0.0;
  bool budget_ok = true;
  bool frugal = true;
  bool non_wasteful = true;
  bool exhausted = true;
  bool satisfied = true;
  bool surplus_identity = true;
};

struct EquilibriumReport {
  double tol = 1e-5;
  CheckResult budget;            // spend_i <= B_i
  CheckResult clearing;          // capacity and (load - C) * p = 0
  CheckResult frugality;         // purchases only at cheapest-bundle nodes
  CheckResult non_wastefulness;  // within the limit and proportional to demand
  CheckResult exhaustion;        // budget spent or limit reached
  CheckResult satisfaction;      // utility equals the best response at p
  CheckResult surplus_identity;  // B_i - spend_i = mu_i * u_i
  std::vector<ServiceAudit> services;

  /// Budget feasibility, market clearing and service satisfaction.
  bool market_equilibrium() const { return budget.pass && clearing.pass && satisfaction.pass; }
  bool all_pass() const {
    return market_equilibrium() && frugality.pass && non_wastefulness.pass &&
           exhaustion.pass && surplus_identity.pass;
  }
};

/// Best utility service i can afford at prices p: the LP
///   max t  s.t.  t <= sum_j y_j,  t <= limit,  sum_j q_j y_j <= B,  y >= 0.
/// Returns +inf when the LP is unbounded (free requests and no limit).
inline double best_response_utility(const ServiceSpec& service, const PriceVector& p) {
  const auto m = static_cast<Eigen::Index>(service.base_demand.rows());
  // Variables: y_0..y_{m-1}, t.
  opt::DenseLP lp(m + 1, opt::Sense::maximize);
  lp.objective(m) = 1.0;
  Eigen::VectorXd row = Eigen::VectorXd::Zero(m + 1);
  row(m) = 1.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (service.allows(static_cast<std::size_t>(j))) row(j) = -1.0;
  }
  lp.add_ineq(row, 0.0);
  Eigen::VectorXd money = Eigen::VectorXd::Zero(m + 1);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (service.allows(static_cast<std::size_t>(j))) {
      money(j) = bundle_price(service, static_cast<std::size_t>(j), p);
    } else {
      lp.upper(j) = 0.0;
    }
  }
  lp.add_ineq(money, service.budget);
  lp.upper(m) = service.utility_limit;
  const auto res = opt::solve_lp(lp);
  if (res.status == opt::LpStatus::unbounded) return kInfinity;
  if (!res.ok()) throw Error("best-response LP failed: " + std::string(opt::to_string(res.status)));
  return res.value;
}

/// Audits a candidate equilibrium. Never throws on a failed condition; every
/// verdict carries the realized slack.
inline EquilibriumReport verify_equilibrium(const MarketInstance& inst,
                                            const EquilibriumSolution& sol, double tol = 1e-5) {
  EquilibriumReport rep;
  rep.tol = tol;
  const auto& x = sol.allocation;
  const auto& p = sol.prices;
  const auto n = inst.num_services();

  const NodeMatrix load = x.load();
  for (Eigen::Index j = 0; j < load.rows(); ++j) {
    for (Eigen::Index r = 0; r < load.cols(); ++r) {
      const std::string where = "node " + std::to_string(j) + " resource " + std::to_string(r);
      const double over = load(j, r) - inst.capacities(j, r);
      rep.clearing.record(over, tol, where + " over capacity");
      rep.clearing.record(std::abs(over * p.values(j, r)), tol, where + " priced but not cleared");
    }
  }

  rep.services.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = inst.services[i];
    auto& a = rep.services[i];
    const std::string who = "service " + std::to_string(i);
    a.budget = s.budget;
    a.utility_limit = s.utility_limit;
    a.spend = spend(x[i], p);
    a.raw_utility = raw_utility(s, x[i]);
    a.utility = std::min(a.raw_utility, s.utility_limit);
    a.reported_mu = i < sol.mu.size() ? sol.mu[i] : 0.0;

    const double btol = tol * std::max(1.0, s.budget);

    const double over_budget = a.spend - s.budget;
    a.budget_ok = over_budget <= btol;
    rep.budget.record(over_budget, btol, who + " overspends");

    const auto q = bundle_prices(s, p);
    a.cheapest_bundle_price = q.cheapest;
    a.frugal_spend = a.utility * q.cheapest;
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      if (!s.allows(j)) continue;
      const double rate = per_node_utility(s, j, x[i].row(static_cast<Eigen::Index>(j)));
      if (rate <= tol) continue;
      const double excess = q.per_node[j] - q.cheapest;
      const double qtol = tol * std::max(1.0, q.cheapest);
      if (excess > qtol) a.frugal = false;
      rep.frugality.record(excess, qtol, who + " buys at non-cheapest node " + std::to_string(j));
    }

    double waste = 0.0;
    if (s.has_limit()) waste = a.raw_utility - s.utility_limit;
    double off_ratio = 0.0;
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double rate = per_node_utility(s, j, x[i].row(jj));
      const NodeMatrix needed = rate * s.base_demand.row(jj);
      off_ratio = std::max(off_ratio, (x[i].row(jj) - needed).cwiseAbs().maxCoeff());
    }
    const double ltol = tol * std::max(1.0, s.has_limit() ? s.utility_limit : 1.0);
    a.non_wasteful = waste <= ltol && off_ratio <= tol;
    rep.non_wastefulness.record(waste, ltol, who + " exceeds its utility limit");
    rep.non_wastefulness.record(off_ratio, tol, who + " holds resources off its demand ratio");

    const double unspent = s.budget - a.spend;
    const double below_limit = s.has_limit() ? s.utility_limit - a.utility : kInfinity;
    const double exhaustion_gap = std::min(std::max(0.0, unspent), std::max(0.0, below_limit));
    a.exhausted = unspent <= btol || below_limit <= ltol;
    rep.exhaustion.record(a.exhausted ? 0.0 : exhaustion_gap, 0.0,
                          who + " neither spends its budget nor reaches its limit");

    a.best_response_utility = best_response_utility(s, p);
    const double shortfall = std::isfinite(a.best_response_utility)
                                 ? std::abs(a.best_response_utility - a.utility)
                                 : kInfinity;
    const double stol = tol * std::max(1.0, std::isfinite(a.best_response_utility)
                                                ? a.best_response_utility
                                                : 1.0);
    a.satisfied = shortfall <= stol;
    rep.satisfaction.record(shortfall, stol, who + " is not at a best response");

    if (a.utility > 0.0) {
      a.kkt_mu = std::max(0.0, s.budget / a.utility - q.cheapest);
      const double identity = std::abs(a.kkt_mu * a.utility - unspent);
      const double reported = std::abs(a.reported_mu * a.utility - unspent);
      a.surplus_identity = identity <= btol && reported <= btol;
      rep.surplus_identity.record(std::max(identity, reported), btol,
                                  who + " surplus differs from mu * u");
    }
  }
  return rep;
}

}  // namespace fogmarket
