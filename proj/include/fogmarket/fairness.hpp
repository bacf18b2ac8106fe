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
#include <vector>

namespace fogmarket {

/// Ratios are taken against max(denominator, kRatioFloor).
inline constexpr double kRatioFloor = 1e-12;

/// Budget-scaled envy-freeness index
///
///   EF(X) = min_{i, i'} u_i(x_i) / u_i((B_i / B_i') x_i').
///
/// The diagonal contributes 1, so EF <= 1 with equality iff no service
/// envies another. Pairs with a zero denominator carry no envy and are
/// skipped; if every pair is skipped the index is 1.
inline double envy_free_index(const MarketInstance& inst, const Allocation& x) {
  const auto n = inst.num_services();
  const auto own = utilities(inst, x);
  double index = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = inst.services[i];
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const NodeMatrix scaled = (s.budget / inst.services[k].budget) * x[k];
      const double other = utility(s, scaled);
      if (other <= 0.0) continue;
      index = std::min(index, own[i] / std::max(other, kRatioFloor));
    }
  }
  return index;
}

/// u_i(x_i) - u_i(x_hat_i) where x_hat gives every service the budget share
/// of every resource.
inline std::vector<double> sharing_incentive_margins(const MarketInstance& inst,
                                                     const Allocation& x) {
  const double total = inst.total_budget();
  std::vector<double> margins(inst.num_services());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const auto& s = inst.services[i];
    const NodeMatrix share = (s.budget / total) * inst.capacities;
    margins[i] = utility(s, x[i]) - utility(s, share);
  }
  return margins;
}

struct ProportionalityResult {
  /// PR_i = u_i(x_i) / u_i(C); NaN for degenerate services.
  std::vector<double> ratios;
  /// B_i / sum B.
  std::vector<double> shares;
  /// Services with u_i(C) = 0.
  std::vector<bool> degenerate;

  bool pass(double tol) const {
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      if (degenerate[i] || ratios[i] < shares[i] - tol) return false;
    }
    return true;
  }
};

inline ProportionalityResult proportionality_check(const MarketInstance& inst,
                                                   const Allocation& x) {
  ProportionalityResult out;
  const auto n = inst.num_services();
  const double total = inst.total_budget();
  out.ratios.resize(n);
  out.shares.resize(n);
  out.degenerate.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = inst.services[i];
    const double whole = utility(s, inst.capacities);
    out.shares[i] = s.budget / total;
    out.degenerate[i] = whole <= 0.0;
    out.ratios[i] = out.degenerate[i] ? std::numeric_limits<double>::quiet_NaN()
                                      : utility(s, x[i]) / std::max(whole, kRatioFloor);
  }
  return out;
}

/// Allocated fraction of every (node, resource).
inline NodeMatrix utilization(const MarketInstance& inst, const Allocation& x) {
  return x.load().cwiseQuotient(inst.capacities);
}

struct FairnessReport {
  double envy_free_index = 1.0;
  std::vector<double> sharing_margins;
  ProportionalityResult proportionality;
  NodeMatrix utilization;

  double min_sharing_margin() const {
    return sharing_margins.empty() ? 0.0
                                   : *std::min_element(sharing_margins.begin(),
                                                       sharing_margins.end());
  }
  double min_proportionality() const {
    double m = kInfinity;
    for (double r : proportionality.ratios) {
      if (!std::isnan(r)) m = std::min(m, r);
    }
    return m;
  }
  double mean_utilization() const { return utilization.mean(); }
  /// Per node, the most utilized resource.
  Eigen::VectorXd peak_utilization() const { return utilization.rowwise().maxCoeff(); }
};

inline FairnessReport audit_fairness(const MarketInstance& inst, const Allocation& x) {
  FairnessReport rep;
  rep.envy_free_index = envy_free_index(inst, x);
  rep.sharing_margins = sharing_incentive_margins(inst, x);
  rep.proportionality = proportionality_check(inst, x);
  rep.utilization = utilization(inst, x);
  return rep;
}

}  // namespace fogmarket
