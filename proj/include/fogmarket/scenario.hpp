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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fogmarket {

struct MachineProfile {
  std::string name;
  /// vCPU, memory (GiB), bandwidth (Mbps).
  std::vector<double> capacity;
};

/// EC2 M4 and M5 general-purpose types; bandwidth is the dedicated EBS figure.
inline std::vector<MachineProfile> default_catalog() {
  return {
      {"m4.large", {2, 8, 450}},         {"m4.xlarge", {4, 16, 750}},
      {"m4.2xlarge", {8, 32, 1000}},     {"m4.4xlarge", {16, 64, 2000}},
      {"m4.10xlarge", {40, 160, 4000}},  {"m4.16xlarge", {64, 256, 10000}},
      {"m5.large", {2, 8, 4750}},        {"m5.xlarge", {4, 16, 4750}},
      {"m5.2xlarge", {8, 32, 4750}},     {"m5.4xlarge", {16, 64, 4750}},
      {"m5.8xlarge", {32, 128, 6800}},   {"m5.12xlarge", {48, 192, 9500}},
      {"m5.16xlarge", {64, 256, 13600}}, {"m5.24xlarge", {96, 384, 19000}},
  };
}

struct DemandRange {
  double low = 0.0;
  double high = 0.0;
};

struct GeneratorConfig {
  std::size_t nodes = 40;
  std::size_t services = 8;
  std::vector<MachineProfile> catalog = default_catalog();
  /// One range per resource type.
  std::vector<DemandRange> demand = {{0.1, 0.5}, {0.4, 2.0}, {10.0, 50.0}};
  double utility_limit = 600.0;
  /// Empty: every budget is 1.
  std::vector<double> budgets;
  /// Draw one demand vector per service and reuse it at every node.
  bool same_demand_at_every_node = true;
  std::uint64_t seed = 1;
};

struct GeneratedInstance {
  MarketInstance instance;  // normalized
  NodeMatrix raw_capacities;
  std::vector<NodeMatrix> raw_demands;
  std::vector<std::string> node_types;
};

inline void check_config(const GeneratorConfig& cfg) {
  if (cfg.catalog.empty()) throw InvalidInstance("generator: empty node catalog");
  if (cfg.nodes < 1 || cfg.services < 1) throw InvalidInstance("generator: need M, N >= 1");
  if (cfg.demand.empty()) throw InvalidInstance("generator: no demand ranges");
  for (const auto& prof : cfg.catalog) {
    if (prof.capacity.size() != cfg.demand.size()) {
      throw InvalidInstance("generator: profile " + prof.name + " has the wrong resource count");
    }
    for (double c : prof.capacity) {
      if (!(c > 0.0)) throw InvalidInstance("generator: profile " + prof.name + " has a zero capacity");
    }
  }
  for (const auto& r : cfg.demand) {
    if (!(r.low > 0.0) || r.high < r.low) throw InvalidInstance("generator: demand ranges must be positive");
  }
  if (!cfg.budgets.empty() && cfg.budgets.size() != cfg.services) {
    throw InvalidInstance("generator: budget vector length differs from N");
  }
}

/// Draws node types and base demands, then normalizes capacities to 1.
inline GeneratedInstance generate(const GeneratorConfig& cfg) {
  check_config(cfg);
  const auto m = static_cast<Eigen::Index>(cfg.nodes);
  const auto nr = static_cast<Eigen::Index>(cfg.demand.size());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.catalog.size() - 1);

  GeneratedInstance out;
  out.raw_capacities.resize(m, nr);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& prof = cfg.catalog[pick(rng)];
    out.node_types.push_back(prof.name);
    for (Eigen::Index r = 0; r < nr; ++r) out.raw_capacities(j, r) = prof.capacity[static_cast<std::size_t>(r)];
  }

  auto draw = [&](Eigen::Index r) {
    const auto& range = cfg.demand[static_cast<std::size_t>(r)];
    return std::uniform_real_distribution<double>(range.low, range.high)(rng);
  };
  MarketInstance raw;
  raw.nodes = cfg.nodes;
  raw.resource_types = cfg.demand.size();
  raw.capacities = out.raw_capacities;
  for (std::size_t i = 0; i < cfg.services; ++i) {
    NodeMatrix d(m, nr);
    if (cfg.same_demand_at_every_node) {
      for (Eigen::Index r = 0; r < nr; ++r) d.col(r).setConstant(draw(r));
    } else {
      for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index r = 0; r < nr; ++r) d(j, r) = draw(r);
      }
    }
    ServiceSpec s;
    s.budget = cfg.budgets.empty() ? 1.0 : cfg.budgets[i];
    s.utility_limit = cfg.utility_limit;
    s.base_demand = d;
    out.raw_demands.push_back(std::move(d));
    raw.services.push_back(std::move(s));
  }
  out.instance = normalize(std::move(raw));
  validate(out.instance);
  return out;
}

/// Raw demand of service i recovered from the normalized instance.
inline NodeMatrix denormalize_demand(const GeneratedInstance& g, std::size_t i) {
  return g.instance.services[i].base_demand.cwiseProduct(g.raw_capacities);
}

}  // namespace fogmarket
