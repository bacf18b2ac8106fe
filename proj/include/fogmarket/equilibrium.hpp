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
#include "fogmarket/opt/log_program.hpp"

#include <chrono>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fogmarket {

struct SolverInfo {
  std::string method;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double wall_time_s = 0.0;
  bool converged = true;
};

/// An allocation together with the prices that support it.
struct EquilibriumSolution {
  Allocation allocation;
  PriceVector prices;
  /// Requests per (service, node).
  RequestRates rates;
  /// Utilities truncated at each service's limit.
  std::vector<double> utilities;
  std::vector<double> spend;
  std::vector<double> surplus;
  /// Utility-limit multipliers, recovered from surplus_i = mu_i * u_i.
  std::vector<double> mu;
  SolverInfo info;
};

/// Completes a solution from request rates and prices: expands the
/// proportional allocation, truncates utilities and recovers spend,
/// surplus and the limit multipliers.
inline EquilibriumSolution polish(const MarketInstance& inst, RequestRates rates,
                                  PriceVector prices, SolverInfo info = {}) {
  rates = rates.cwiseMax(0.0);
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      if (!inst.services[i].allows(j)) rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
    }
  }
  prices.values = prices.values.cwiseMax(0.0);
  EquilibriumSolution sol;
  sol.allocation = expand(inst, rates);
  sol.rates = std::move(rates);
  sol.prices = std::move(prices);
  sol.info = std::move(info);
  const auto n = inst.num_services();
  sol.utilities.resize(n);
  sol.spend.resize(n);
  sol.surplus.resize(n);
  sol.mu.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = inst.services[i];
    const double raw = sol.rates.row(static_cast<Eigen::Index>(i)).sum();
    sol.utilities[i] = std::min(raw, s.utility_limit);
    sol.spend[i] = spend(i, sol.allocation, sol.prices);
    sol.surplus[i] = s.budget - sol.spend[i];
    sol.mu[i] = sol.utilities[i] > 0.0 ? std::max(0.0, sol.surplus[i]) / sol.utilities[i] : 0.0;
  }
  return sol;
}

/// Builds a solution from an arbitrary allocation and price vector, e.g. to
/// audit a hand-constructed point.
inline EquilibriumSolution make_solution(const MarketInstance& inst, const Allocation& x,
                                         const PriceVector& p) {
  EquilibriumSolution sol = polish(inst, request_rates(inst, x), p, {"external"});
  sol.allocation = x;
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    sol.utilities[i] = utility(inst.services[i], x[i]);
    sol.spend[i] = spend(i, x, p);
    sol.surplus[i] = inst.services[i].budget - sol.spend[i];
    sol.mu[i] = sol.utilities[i] > 0.0 ? std::max(0.0, sol.surplus[i]) / sol.utilities[i] : 0.0;
  }
  return sol;
}

struct EquilibriumOptions {
  opt::LogProgramOptions ipm;
  /// Draw the interior starting point at random instead of the uniform one.
  std::optional<std::uint64_t> random_start_seed;
};

namespace detail {

struct ProgramLayout {
  opt::LogProgram program;
  // var_of(i, j) = index into v, or -1 when node j is not allowed.
  Eigen::MatrixXi var_of;
  std::vector<std::pair<std::size_t, std::size_t>> var_pairs;
  // Capacity row index for each (j, r); -1 when no service uses the resource.
  Eigen::MatrixXi capacity_row;
};

inline ProgramLayout build_log_program(const MarketInstance& inst, bool with_limits) {
  ProgramLayout lay;
  const auto n = static_cast<Eigen::Index>(inst.num_services());
  const auto m = static_cast<Eigen::Index>(inst.nodes);
  const auto nr = static_cast<Eigen::Index>(inst.resource_types);
  lay.var_of = Eigen::MatrixXi::Constant(n, m, -1);
  auto& prog = lay.program;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = inst.services[static_cast<std::size_t>(i)];
    std::vector<Eigen::Index> group;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!s.allows(static_cast<std::size_t>(j))) continue;
      lay.var_of(i, j) = static_cast<int>(prog.num_vars);
      lay.var_pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      group.push_back(prog.num_vars++);
    }
    prog.groups.push_back(std::move(group));
    prog.weights.push_back(s.budget);
  }
  lay.capacity_row = Eigen::MatrixXi::Constant(m, nr, -1);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index r = 0; r < nr; ++r) {
      opt::SparseRow row;
      row.rhs = inst.capacities(j, r);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = lay.var_of(i, j);
        const double a = inst.services[static_cast<std::size_t>(i)].base_demand(j, r);
        if (k >= 0 && a > 0.0) row.terms.emplace_back(k, a);
      }
      if (row.terms.empty()) continue;
      lay.capacity_row(j, r) = static_cast<int>(prog.rows.size());
      prog.rows.push_back(std::move(row));
    }
  }
  if (with_limits) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& s = inst.services[static_cast<std::size_t>(i)];
      if (!s.has_limit()) continue;
      opt::SparseRow row;
      row.rhs = s.utility_limit;
      for (auto k : prog.groups[static_cast<std::size_t>(i)]) row.terms.emplace_back(k, 1.0);
      prog.rows.push_back(std::move(row));
    }
  }
  return lay;
}

inline Eigen::VectorXd random_interior_point(const opt::LogProgram& prog, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Eigen::VectorXd v(prog.num_vars);
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = unif(rng);
  double scale = 1.0;
  for (const auto& row : prog.rows) {
    const double load = row.dot(v);
    if (load > 0.0) scale = std::min(scale, unif(rng) * 0.9 * row.rhs / load);
  }
  return scale * v;
}

inline EquilibriumSolution solve_log_market(const MarketInstance& inst, bool with_limits,
                                            const EquilibriumOptions& opts) {
  validate(inst);
  const auto started = std::chrono::steady_clock::now();
  const auto lay = build_log_program(inst, with_limits);
  std::optional<Eigen::VectorXd> start;
  if (opts.random_start_seed) start = random_interior_point(lay.program, *opts.random_start_seed);
  const auto res = opt::solve_log_program(lay.program, opts.ipm, start);

  RequestRates rates = RequestRates::Zero(static_cast<Eigen::Index>(inst.num_services()),
                                          static_cast<Eigen::Index>(inst.nodes));
  for (std::size_t k = 0; k < lay.var_pairs.size(); ++k) {
    const auto [i, j] = lay.var_pairs[k];
    rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = res.v(static_cast<Eigen::Index>(k));
  }
  PriceVector prices{NodeMatrix::Zero(static_cast<Eigen::Index>(inst.nodes),
                                      static_cast<Eigen::Index>(inst.resource_types))};
  for (Eigen::Index j = 0; j < lay.capacity_row.rows(); ++j) {
    for (Eigen::Index r = 0; r < lay.capacity_row.cols(); ++r) {
      const int row = lay.capacity_row(j, r);
      if (row >= 0) prices.values(j, r) = res.row_duals(row);
    }
  }
  SolverInfo info;
  info.method = with_limits ? "geg-interior-point" : "eg-interior-point";
  info.iterations = res.iterations;
  info.dual_residual = res.dual_residual;
  info.gap = res.gap;
  // A stalled line search near the optimum still leaves a usable point.
  info.converged = res.converged || res.gap <= 1e-9 * inst.total_budget();
  info.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return polish(inst, std::move(rates), std::move(prices), std::move(info));
}

}  // namespace detail

/// Maximizes sum_i B_i ln sum_j u_ij over proportional allocations subject to
/// the capacity and utility-limit constraints. Prices are the capacity duals.
/// Throws DegenerateInstance when a service has no usable node.
inline EquilibriumSolution solve_geg(const MarketInstance& inst,
                                     const EquilibriumOptions& opts = {}) {
  return detail::solve_log_market(inst, /*with_limits=*/true, opts);
}

/// Same program without the utility-limit constraints; reported utilities
/// are still truncated at the limits.
inline EquilibriumSolution solve_eg(const MarketInstance& inst,
                                    const EquilibriumOptions& opts = {}) {
  return detail::solve_log_market(inst, /*with_limits=*/false, opts);
}

}  // namespace fogmarket
