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
#include "fogmarket/equilibrium.hpp"
#include "fogmarket/market.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace fogmarket {

enum class SchemeId { geg, eg, prop, swm, mm };

inline constexpr std::array<SchemeId, 5> kAllSchemes = {SchemeId::geg, SchemeId::eg,
                                                        SchemeId::prop, SchemeId::swm,
                                                        SchemeId::mm};

inline std::string_view to_string(SchemeId s) {
  switch (s) {
    case SchemeId::geg: return "geg";
    case SchemeId::eg: return "eg";
    case SchemeId::prop: return "prop";
    case SchemeId::swm: return "swm";
    case SchemeId::mm: return "mm";
  }
  return "?";
}

inline std::optional<SchemeId> parse_scheme(std::string_view name) {
  for (auto s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

/// Every service gets the budget share B_i / sum B of every resource.
inline Allocation solve_prop(const MarketInstance& inst) {
  Allocation x = Allocation::zeros(inst);
  const double total = inst.total_budget();
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    x[i] = (inst.services[i].budget / total) * inst.capacities;
  }
  return x;
}

/// Maximum total (truncated) utility, budgets ignored.
inline Allocation solve_swm(const MarketInstance& inst) {
  validate(inst);
  auto w = detail::build_welfare_lp(inst, 0);
  for (std::size_t i = 0; i < inst.num_services(); ++i) w.lp.objective(w.utility_col(i)) = 1.0;
  const auto res = opt::solve_lp(w.lp);
  if (!res.ok()) throw Error("swm LP failed: " + std::string(opt::to_string(res.status)));
  return expand(inst, w.rates(inst, res.x));
}

/// Maximum smallest (truncated) utility, budgets ignored. Single level: the
/// optimal vertex is returned as-is, with no lexicographic refinement.
inline Allocation solve_mm(const MarketInstance& inst) {
  validate(inst);
  auto w = detail::build_welfare_lp(inst, 1);
  const Eigen::Index floor_col = w.first_extra;
  w.lp.objective(floor_col) = 1.0;
  w.lp.lower(floor_col) = -kInfinity;
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(w.lp.num_vars());
    row(floor_col) = 1.0;
    row(w.utility_col(i)) = -1.0;
    w.lp.add_ineq(row, 0.0);
  }
  const auto res = opt::solve_lp(w.lp);
  if (!res.ok()) throw Error("mm LP failed: " + std::string(opt::to_string(res.status)));
  return expand(inst, w.rates(inst, res.x));
}

/// Allocation produced by any of the five schemes. Market schemes also carry
/// their prices.
struct SchemeResult {
  SchemeId scheme = SchemeId::geg;
  Allocation allocation;
  std::vector<double> utilities;
  std::optional<EquilibriumSolution> equilibrium;
  double wall_time_s = 0.0;
};

inline SchemeResult run_scheme(const MarketInstance& inst, SchemeId scheme,
                               const EquilibriumOptions& opts = {}) {
  const auto started = std::chrono::steady_clock::now();
  SchemeResult out;
  out.scheme = scheme;
  switch (scheme) {
    case SchemeId::geg: out.equilibrium = solve_geg(inst, opts); break;
    case SchemeId::eg: out.equilibrium = solve_eg(inst, opts); break;
    case SchemeId::prop: out.allocation = solve_prop(inst); break;
    case SchemeId::swm: out.allocation = solve_swm(inst); break;
    case SchemeId::mm: out.allocation = solve_mm(inst); break;
  }
  if (out.equilibrium) out.allocation = out.equilibrium->allocation;
  out.utilities = utilities(inst, out.allocation);
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace fogmarket
