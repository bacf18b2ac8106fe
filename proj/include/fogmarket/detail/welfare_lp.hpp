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
#include "fogmarket/opt/lp.hpp"

#include <utility>
#include <vector>

namespace fogmarket::detail {

// Epigraph LP over request rates shared by the welfare baselines and the
// Pareto check. Columns: one rate per allowed (service, node), then one
// truncated utility t_i per service, then `extra` caller-owned columns.
// Rows: capacity per (node, resource) and t_i <= sum_j u_ij; bounds
// 0 <= t_i <= limit_i.
struct WelfareLp {
  opt::DenseLP lp;
  std::vector<std::pair<std::size_t, std::size_t>> rate_pairs;
  Eigen::Index first_utility = 0;
  Eigen::Index first_extra = 0;

  Eigen::Index utility_col(std::size_t i) const {
    return first_utility + static_cast<Eigen::Index>(i);
  }

  RequestRates rates(const MarketInstance& inst, const Eigen::VectorXd& sol) const {
    RequestRates out = RequestRates::Zero(static_cast<Eigen::Index>(inst.num_services()),
                                          static_cast<Eigen::Index>(inst.nodes));
    for (std::size_t k = 0; k < rate_pairs.size(); ++k) {
      const auto [i, j] = rate_pairs[k];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::max(0.0, sol(static_cast<Eigen::Index>(k)));
    }
    return out;
  }
};

inline WelfareLp build_welfare_lp(const MarketInstance& inst, Eigen::Index extra,
                                  opt::Sense sense = opt::Sense::maximize) {
  WelfareLp w;
  const auto n = inst.num_services();
  Eigen::MatrixXi var_of = Eigen::MatrixXi::Constant(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(inst.nodes), -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      if (!inst.services[i].allows(j)) continue;
      var_of(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<int>(w.rate_pairs.size());
      w.rate_pairs.emplace_back(i, j);
    }
  }
  w.first_utility = static_cast<Eigen::Index>(w.rate_pairs.size());
  w.first_extra = w.first_utility + static_cast<Eigen::Index>(n);
  const Eigen::Index cols = w.first_extra + extra;
  w.lp = opt::DenseLP(cols, sense);

  for (std::size_t j = 0; j < inst.nodes; ++j) {
    for (std::size_t r = 0; r < inst.resource_types; ++r) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(cols);
      bool used = false;
      for (std::size_t i = 0; i < n; ++i) {
        const int k = var_of(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double a = inst.services[i].base_demand(static_cast<Eigen::Index>(j),
                                                      static_cast<Eigen::Index>(r));
        if (k >= 0 && a > 0.0) {
          row(k) = a;
          used = true;
        }
      }
      if (used) {
        w.lp.add_ineq(row, inst.capacities(static_cast<Eigen::Index>(j),
                                           static_cast<Eigen::Index>(r)));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(cols);
    row(w.utility_col(i)) = 1.0;
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      const int k = var_of(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (k >= 0) row(k) = -1.0;
    }
    w.lp.add_ineq(row, 0.0);
    w.lp.upper(w.utility_col(i)) = inst.services[i].utility_limit;
  }
  return w;
}

}  // namespace fogmarket::detail
