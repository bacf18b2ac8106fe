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

#include "fogmarket/detail/welfare_lp.hpp"
#include "fogmarket/market.hpp"

#include <optional>
#include <vector>

namespace fogmarket {

struct ParetoResult {
  bool pareto_optimal = true;
  /// Optimal total improvement sum_i delta_i.
  double improvement = 0.0;
  std::vector<double> baseline_utilities;
  /// Present when an improving allocation exists.
  std::optional<Allocation> certificate;
  std::vector<double> certificate_utilities;
};

/// Looks for an allocation that keeps every service at least as well off and
/// maximizes the total gain:
///
///   max sum_i delta_i  s.t.  t_i >= u_i(x_i) + delta_i, delta >= 0,
///                            t_i <= sum_j u'_ij, t_i <= limit_i, capacity.
///
/// `x` is Pareto-optimal iff the optimum is at most `tol`.
inline ParetoResult pareto_check(const MarketInstance& inst, const Allocation& x,
                                 double tol = 1e-5) {
  ParetoResult out;
  out.baseline_utilities = utilities(inst, x);
  const auto n = inst.num_services();

  // Targets are relaxed by a hair so that allocations sitting exactly on
  // the capacity boundary (up to rounding) stay feasible.
  for (double relax : {1e-10, 1e-7}) {
    auto w = detail::build_welfare_lp(inst, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index delta = w.first_extra + static_cast<Eigen::Index>(i);
      w.lp.objective(delta) = 1.0;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(w.lp.num_vars());
      row(w.utility_col(i)) = -1.0;
      row(delta) = 1.0;
      const double target = out.baseline_utilities[i];
      w.lp.add_ineq(row, -(target - relax * std::max(1.0, target)));
    }
    const auto res = opt::solve_lp(w.lp);
    if (res.status == opt::LpStatus::infeasible) continue;
    if (!res.ok()) throw Error("pareto LP failed: " + std::string(opt::to_string(res.status)));
    out.improvement = std::max(0.0, res.value);
    out.pareto_optimal = out.improvement <= tol;
    if (!out.pareto_optimal) {
      out.certificate = expand(inst, w.rates(inst, res.x));
      out.certificate_utilities = utilities(inst, *out.certificate);
    }
    return out;
  }
  throw Error("pareto check: allocation is not capacity-feasible");
}

}  // namespace fogmarket
