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

#include "fogmarket/fogmarket.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace fogmarket::testing {

/// Services on single-resource nodes, demand given per node as a rate.
/// a(j) = 1 / rate(j), so u_i = sum_j rate_ij * x_ij.
inline MarketInstance linear_market(const std::vector<std::vector<double>>& rates,
                                    const std::vector<double>& budgets,
                                    const std::vector<double>& limits) {
  MarketInstance inst;
  inst.nodes = rates.front().size();
  inst.resource_types = 1;
  inst.capacities = NodeMatrix::Ones(static_cast<Eigen::Index>(inst.nodes), 1);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    ServiceSpec s;
    s.budget = budgets[i];
    s.utility_limit = limits[i];
    s.base_demand.resize(static_cast<Eigen::Index>(inst.nodes), 1);
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      s.base_demand(static_cast<Eigen::Index>(j), 0) = 1.0 / rates[i][j];
    }
    inst.services.push_back(std::move(s));
  }
  return inst;
}

/// One node, one resource; a = (0.2, 0.1), limits (1, 10), budgets (1, 1).
inline MarketInstance satiated_pair() { return linear_market({{5.0}, {10.0}}, {1, 1}, {1, 10}); }

/// u1 = min(8 x11 + 2 x12, 1), u2 = 5 x21 + 2 x22, budgets (3, 1).
inline MarketInstance two_node_market() {
  return linear_market({{8, 2}, {5, 2}}, {3, 1}, {1, kInfinity});
}

/// u1 = 4 x11 + x12 and u2 given by the reported rates, budgets (1, 1).
inline MarketInstance misreport_market(double r21, double r22) {
  return linear_market({{4, 1}, {r21, r22}}, {1, 1}, {kInfinity, kInfinity});
}

inline NodeMatrix column(std::initializer_list<double> v) {
  NodeMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index k = 0;
  for (double x : v) m(k++, 0) = x;
  return m;
}

struct RandomInstanceConfig {
  std::size_t max_nodes = 6;
  std::size_t max_services = 5;
  std::size_t max_resources = 3;
  double limit_probability = 0.5;
  double zero_demand_probability = 0.15;
  double restricted_probability = 0.2;
};

/// Small random instance with mixed limits, sparse demands and node
/// restrictions. Always valid.
inline MarketInstance random_instance(std::uint64_t seed, const RandomInstanceConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto count = [&](std::size_t hi) { return std::uniform_int_distribution<std::size_t>(1, hi)(rng); };
  MarketInstance inst;
  inst.nodes = count(cfg.max_nodes);
  inst.resource_types = count(cfg.max_resources);
  const auto m = static_cast<Eigen::Index>(inst.nodes);
  const auto nr = static_cast<Eigen::Index>(inst.resource_types);
  inst.capacities.resize(m, nr);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index r = 0; r < nr; ++r) inst.capacities(j, r) = uni(0.5, 2.0);
  }
  const std::size_t n = count(cfg.max_services);
  for (std::size_t i = 0; i < n; ++i) {
    ServiceSpec s;
    s.budget = uni(0.5, 3.0);
    s.base_demand.resize(m, nr);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index r = 0; r < nr; ++r) {
        s.base_demand(j, r) = uni(0.0, 1.0) < cfg.zero_demand_probability ? 0.0 : uni(0.05, 1.0);
      }
      if (s.base_demand.row(j).maxCoeff() <= 0.0) {
        s.base_demand(j, std::uniform_int_distribution<Eigen::Index>(0, nr - 1)(rng)) = uni(0.05, 1.0);
      }
    }
    if (inst.nodes > 1 && uni(0.0, 1.0) < cfg.restricted_probability) {
      s.allowed_nodes.assign(inst.nodes, false);
      for (std::size_t j = 0; j < inst.nodes; ++j) s.allowed_nodes[j] = uni(0.0, 1.0) < 0.6;
      s.allowed_nodes[std::uniform_int_distribution<std::size_t>(0, inst.nodes - 1)(rng)] = true;
    }
    if (uni(0.0, 1.0) < cfg.limit_probability) {
      // Scale the limit against the utility of owning every allowed node.
      double solo = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!s.allows(static_cast<std::size_t>(j))) continue;
        solo += per_node_utility(s, static_cast<std::size_t>(j), inst.capacities.row(j));
      }
      s.utility_limit = uni(0.1, 1.0) * solo;
    }
    inst.services.push_back(std::move(s));
  }
  return normalize(std::move(inst));
}

/// Brute-force LP oracle: the best basic feasible point. Only for bounded
/// problems with a handful of variables.
inline std::optional<double> vertex_enumeration(const opt::DenseLP& lp, double feas_tol = 1e-9) {
  const Eigen::Index n = lp.num_vars();
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (Eigen::Index k = 0; k < lp.ineq.rows(); ++k) {
    rows.push_back(lp.ineq.row(k).transpose());
    rhs.push_back(lp.ineq_rhs(k));
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(v) = 1.0;
    if (std::isfinite(lp.lower(v))) {
      rows.push_back(-e);
      rhs.push_back(-lp.lower(v));
    }
    if (std::isfinite(lp.upper(v))) {
      rows.push_back(e);
      rhs.push_back(lp.upper(v));
    }
  }
  const Eigen::Index neq = lp.eq.rows();
  const Eigen::Index pick = n - neq;
  std::optional<double> best;
  if (pick < 0) return best;
  const auto total = static_cast<Eigen::Index>(rows.size());
  std::vector<bool> mask(static_cast<std::size_t>(total), false);
  std::fill(mask.begin(), mask.begin() + pick, true);
  do {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    Eigen::Index k = 0;
    for (Eigen::Index e = 0; e < neq; ++e, ++k) {
      a.row(k) = lp.eq.row(e);
      b(k) = lp.eq_rhs(e);
    }
    for (Eigen::Index c = 0; c < total; ++c) {
      if (!mask[static_cast<std::size_t>(c)]) continue;
      a.row(k) = rows[static_cast<std::size_t>(c)].transpose();
      b(k++) = rhs[static_cast<std::size_t>(c)];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(b);
    bool feasible = true;
    for (std::size_t c = 0; c < rows.size() && feasible; ++c) {
      feasible = rows[c].dot(x) <= rhs[c] + feas_tol * std::max(1.0, std::abs(rhs[c]));
    }
    for (Eigen::Index e = 0; e < neq && feasible; ++e) {
      feasible = std::abs(lp.eq.row(e).dot(x) - lp.eq_rhs(e)) <= feas_tol * std::max(1.0, std::abs(lp.eq_rhs(e)));
    }
    if (!feasible) continue;
    const double value = lp.objective.dot(x);
    if (!best || (lp.sense == opt::Sense::maximize ? value > *best : value < *best)) best = value;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

/// Grid search over (u_1, u_2) in [0, hi]^2 for the x-update objective.
inline double x_update_grid_minimum(const opt::QuadLogSubproblem& sub, double hi, double step) {
  double best = kInfinity;
  const auto steps = static_cast<int>(std::lround(hi / step));
  Eigen::VectorXd u(sub.base_demand.rows());
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; b <= (u.size() > 1 ? steps : 0); ++b) {
      u(0) = a * step;
      if (u.size() > 1) u(1) = b * step;
      if (u.sum() <= 0.0 || u.sum() > sub.cap) continue;
      best = std::min(best, opt::x_update_objective(sub, u));
    }
  }
  // The grid rarely lands on the cap, where a binding optimum sits.
  if (std::isfinite(sub.cap)) {
    for (int a = 0; a <= steps; ++a) {
      u(0) = u.size() > 1 ? std::min(a * step, sub.cap) : sub.cap;
      if (u.size() > 1) u(1) = sub.cap - u(0);
      best = std::min(best, opt::x_update_objective(sub, u));
    }
  }
  return best;
}

}  // namespace fogmarket::testing
