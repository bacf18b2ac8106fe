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

#include "fogmarket/detail/format.hpp"
#include "fogmarket/equilibrium.hpp"
#include "fogmarket/fairness.hpp"
#include "fogmarket/privacy.hpp"
#include "fogmarket/scenario.hpp"
#include "fogmarket/verify.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fogmarket {

using Json = nlohmann::json;

namespace detail {

inline Json matrix_to_json(const NodeMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    Json row = Json::array();
    for (Eigen::Index r = 0; r < m.cols(); ++r) row.push_back(m(j, r));
    out.push_back(std::move(row));
  }
  return out;
}

inline NodeMatrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols,
                                   const std::string& what) {
  if (!j.is_array() || j.size() != rows) {
    throw InvalidInstance(what + ": expected " + std::to_string(rows) + " rows");
  }
  NodeMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t a = 0; a < rows; ++a) {
    if (!j[a].is_array() || j[a].size() != cols) {
      throw InvalidInstance(what + ": row " + std::to_string(a) + " needs " + std::to_string(cols) +
                            " entries");
    }
    for (std::size_t b = 0; b < cols; ++b) {
      if (!j[a][b].is_number()) throw InvalidInstance(what + ": entries must be numbers");
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = j[a][b].get<double>();
    }
  }
  return m;
}

inline Json limit_to_json(double v) { return std::isfinite(v) ? Json(v) : Json("inf"); }

inline double limit_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfinity;
    throw InvalidInstance("utility_limit must be a number or \"inf\"");
  }
  if (!j.is_number()) throw InvalidInstance("utility_limit must be a number or \"inf\"");
  return j.get<double>();
}

inline Json parse_json(std::istream& is, const std::string& what) {
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw Error(what + ": " + e.what());
  }
}

}  // namespace detail

// -- instances -----------------------------------------------------------------

inline Json instance_to_json(const MarketInstance& inst) {
  Json j;
  j["nodes"] = inst.nodes;
  j["resource_types"] = inst.resource_types;
  j["capacities"] = detail::matrix_to_json(inst.capacities);
  j["services"] = Json::array();
  for (const auto& s : inst.services) {
    Json sj;
    sj["budget"] = s.budget;
    sj["utility_limit"] = detail::limit_to_json(s.utility_limit);
    sj["base_demand"] = detail::matrix_to_json(s.base_demand);
    if (!s.allowed_nodes.empty()) {
      Json allowed = Json::array();
      for (std::size_t n = 0; n < s.allowed_nodes.size(); ++n) {
        if (s.allowed_nodes[n]) allowed.push_back(n);
      }
      sj["allowed_nodes"] = std::move(allowed);
    }
    j["services"].push_back(std::move(sj));
  }
  return j;
}

/// Parses and normalizes an instance document.
inline MarketInstance instance_from_json(const Json& j) {
  try {
    MarketInstance inst;
    inst.nodes = j.at("nodes").get<std::size_t>();
    inst.resource_types = j.at("resource_types").get<std::size_t>();
    inst.capacities =
        detail::matrix_from_json(j.at("capacities"), inst.nodes, inst.resource_types, "capacities");
    for (const auto& sj : j.at("services")) {
      ServiceSpec s;
      s.budget = sj.at("budget").get<double>();
      s.utility_limit = sj.contains("utility_limit") ? detail::limit_from_json(sj["utility_limit"])
                                                     : kInfinity;
      s.base_demand = detail::matrix_from_json(sj.at("base_demand"), inst.nodes,
                                               inst.resource_types, "base_demand");
      if (sj.contains("allowed_nodes")) {
        s.allowed_nodes.assign(inst.nodes, false);
        for (const auto& n : sj["allowed_nodes"]) {
          const auto idx = n.get<std::size_t>();
          if (idx >= inst.nodes) throw InvalidInstance("allowed_nodes index out of range");
          s.allowed_nodes[idx] = true;
        }
      }
      inst.services.push_back(std::move(s));
    }
    return normalize(std::move(inst));
  } catch (const Json::exception& e) {
    throw InvalidInstance(std::string("instance: ") + e.what());
  }
}

inline MarketInstance read_instance(std::istream& is) {
  return instance_from_json(detail::parse_json(is, "instance"));
}

inline MarketInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_instance(f);
}

/// The normalized instance plus the raw capacities and node types.
inline Json generated_to_json(const GeneratedInstance& g) {
  Json j = instance_to_json(g.instance);
  j["raw_capacities"] = detail::matrix_to_json(g.raw_capacities);
  j["node_types"] = g.node_types;
  return j;
}

inline std::vector<MachineProfile> catalog_from_json(const Json& j) {
  std::vector<MachineProfile> out;
  try {
    for (const auto& pj : j.at("profiles")) {
      out.push_back({pj.at("name").get<std::string>(), pj.at("capacity").get<std::vector<double>>()});
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("catalog: ") + e.what());
  }
  if (out.empty()) throw InvalidInstance("catalog: no profiles");
  return out;
}

inline std::vector<MachineProfile> load_catalog(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return catalog_from_json(detail::parse_json(f, "catalog"));
}

// -- solutions -----------------------------------------------------------------

inline Json solver_info_to_json(const SolverInfo& info) {
  return {{"method", info.method},
          {"iterations", info.iterations},
          {"primal_residual", info.primal_residual},
          {"dual_residual", info.dual_residual},
          {"gap", info.gap},
          {"wall_time_s", info.wall_time_s},
          {"converged", info.converged}};
}

inline Json allocation_to_json(const Allocation& x) {
  Json out = Json::array();
  for (const auto& b : x.bundles) out.push_back(detail::matrix_to_json(b));
  return out;
}

inline Json solution_to_json(const EquilibriumSolution& sol) {
  Json j;
  j["prices"] = detail::matrix_to_json(sol.prices.values);
  j["allocation"] = allocation_to_json(sol.allocation);
  j["utilities"] = sol.utilities;
  j["spend"] = sol.spend;
  j["surplus"] = sol.surplus;
  j["mu"] = sol.mu;
  j["metadata"] = solver_info_to_json(sol.info);
  return j;
}

/// Schemes without prices write `"prices": null`.
inline Json allocation_solution_to_json(const MarketInstance& inst, const Allocation& x,
                                        const std::string& method, double wall_time_s) {
  Json j;
  j["prices"] = nullptr;
  j["allocation"] = allocation_to_json(x);
  j["utilities"] = utilities(inst, x);
  j["metadata"] = {{"method", method}, {"wall_time_s", wall_time_s}};
  return j;
}

inline Allocation allocation_from_json(const MarketInstance& inst, const Json& j) {
  if (!j.is_array() || j.size() != inst.num_services()) {
    throw Error("solution: allocation needs one matrix per service");
  }
  Allocation x;
  for (const auto& b : j) {
    x.bundles.push_back(detail::matrix_from_json(b, inst.nodes, inst.resource_types, "allocation"));
  }
  return x;
}

/// Rebuilds a priced solution; the reported mu is kept when present.
inline EquilibriumSolution solution_from_json(const MarketInstance& inst, const Json& j) {
  try {
    if (!j.contains("prices") || j["prices"].is_null()) {
      throw Error("solution carries no prices; only market schemes can be verified");
    }
    const Allocation x = allocation_from_json(inst, j.at("allocation"));
    PriceVector p{detail::matrix_from_json(j["prices"], inst.nodes, inst.resource_types, "prices")};
    EquilibriumSolution sol = make_solution(inst, x, p);
    if (j.contains("mu")) {
      const auto mu = j["mu"].get<std::vector<double>>();
      if (mu.size() == inst.num_services()) sol.mu = mu;
    }
    if (j.contains("metadata") && j["metadata"].contains("method")) {
      sol.info.method = j["metadata"]["method"].get<std::string>();
    }
    return sol;
  } catch (const Json::exception& e) {
    throw Error(std::string("solution: ") + e.what());
  }
}

inline Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return detail::parse_json(f, path);
}

// -- reports -------------------------------------------------------------------

inline Json check_to_json(const CheckResult& c) {
  return {{"pass", c.pass}, {"worst", c.worst}, {"detail", c.detail}};
}

inline Json report_to_json(const EquilibriumReport& rep) {
  Json j;
  j["tol"] = rep.tol;
  j["market_equilibrium"] = rep.market_equilibrium();
  j["all_pass"] = rep.all_pass();
  j["checks"] = {{"budget", check_to_json(rep.budget)},
                 {"clearing", check_to_json(rep.clearing)},
                 {"frugality", check_to_json(rep.frugality)},
                 {"non_wastefulness", check_to_json(rep.non_wastefulness)},
                 {"exhaustion", check_to_json(rep.exhaustion)},
                 {"satisfaction", check_to_json(rep.satisfaction)},
                 {"surplus_identity", check_to_json(rep.surplus_identity)}};
  j["services"] = Json::array();
  for (const auto& a : rep.services) {
    j["services"].push_back({{"budget", a.budget},
                             {"spend", a.spend},
                             {"frugal_spend", a.frugal_spend},
                             {"utility", a.utility},
                             {"raw_utility", a.raw_utility},
                             {"utility_limit", detail::limit_to_json(a.utility_limit)},
                             {"cheapest_bundle_price", a.cheapest_bundle_price},
                             {"best_response_utility", detail::limit_to_json(a.best_response_utility)},
                             {"kkt_mu", a.kkt_mu},
                             {"reported_mu", a.reported_mu},
                             {"budget_ok", a.budget_ok},
                             {"frugal", a.frugal},
                             {"non_wasteful", a.non_wasteful},
                             {"exhausted", a.exhausted},
                             {"satisfied", a.satisfied},
                             {"surplus_identity", a.surplus_identity}});
  }
  return j;
}

inline constexpr const char* kAuditCsvHeader =
    "scheme,seed,ef_index,min_sharing_margin,min_proportionality,mean_utilization";

inline std::string audit_csv_row(const std::string& scheme, std::uint64_t seed,
                                 const FairnessReport& rep) {
  using detail::format_number;
  return scheme + ',' + std::to_string(seed) + ',' + format_number(rep.envy_free_index) + ',' +
         format_number(rep.min_sharing_margin()) + ',' + format_number(rep.min_proportionality()) + ',' +
         format_number(rep.mean_utilization());
}

// -- transcripts and manifests -------------------------------------------------

inline std::string endpoint_name(long id) {
  return id == kPlatform ? std::string("platform") : "service-" + std::to_string(id);
}

/// One JSON object per line: round, from, to, kind, payload digest.
inline void write_transcript_jsonl(std::ostream& os, const MaskingRound& rd) {
  for (const auto& m : rd.messages) {
    const Json line = {{"round", m.round},
                       {"from", endpoint_name(m.from)},
                       {"to", endpoint_name(m.to)},
                       {"kind", to_string(m.kind)},
                       {"payload_digest", payload_digest(m.payload)}};
    os << line.dump() << '\n';
  }
}

inline std::string sha256_hex(const std::string& text) { return sha256_hex(text.data(), text.size()); }

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string command;
  /// SHA-256 of the canonical option dump.
  std::string config_digest;
  Json config;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;

  Json to_json() const {
    return {{"command", command},
            {"config", config},
            {"config_digest", config_digest},
            {"seed", seed},
            {"versions",
             {{"fogmarket", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION)},
              {"compiler", __VERSION__}}},
            {"wall_time_s", wall_time_s},
            {"outputs", outputs}};
  }
};

}  // namespace fogmarket
