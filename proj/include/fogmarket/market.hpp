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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fogmarket {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Absolute slack allowed on capacity checks of floating-point allocations.
inline constexpr double kFeasibilityTol = 1e-7;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instance violates a structural invariant (shapes, signs, free utility).
class InvalidInstance : public Error {
 public:
  using Error::Error;
};

/// A service cannot obtain positive utility anywhere.
class DegenerateInstance : public Error {
 public:
  DegenerateInstance(std::size_t service, const std::string& what)
      : Error(what), service_(service) {}
  std::size_t service() const { return service_; }

 private:
  std::size_t service_;
};

/// Dense node-by-resource matrix, row j is fog node j.
using NodeMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ServiceSpec {
  double budget = 1.0;
  /// Maximum number of requests the service can use; kInfinity when unbounded.
  double utility_limit = kInfinity;
  /// base_demand(j, r): units of resource r at node j consumed per request.
  NodeMatrix base_demand;
  /// Empty means every node is allowed.
  std::vector<bool> allowed_nodes;

  bool allows(std::size_t node) const {
    return allowed_nodes.empty() || allowed_nodes[node];
  }
  bool has_limit() const { return std::isfinite(utility_limit); }
};

struct MarketInstance {
  std::size_t nodes = 0;
  std::size_t resource_types = 0;
  NodeMatrix capacities;
  std::vector<ServiceSpec> services;

  std::size_t num_services() const { return services.size(); }
  double total_budget() const {
    double total = 0.0;
    for (const auto& s : services) total += s.budget;
    return total;
  }
};

/// x(i)(j, r): amount of resource r at node j held by service i.
struct Allocation {
  std::vector<NodeMatrix> bundles;

  static Allocation zeros(const MarketInstance& inst) {
    Allocation a;
    a.bundles.assign(inst.num_services(),
                     NodeMatrix::Zero(static_cast<Eigen::Index>(inst.nodes),
                                      static_cast<Eigen::Index>(inst.resource_types)));
    return a;
  }
  std::size_t num_services() const { return bundles.size(); }
  const NodeMatrix& operator[](std::size_t i) const { return bundles[i]; }
  NodeMatrix& operator[](std::size_t i) { return bundles[i]; }

  /// Sum over services, same shape as the capacity matrix.
  NodeMatrix load() const {
    NodeMatrix total = NodeMatrix::Zero(bundles.front().rows(), bundles.front().cols());
    for (const auto& b : bundles) total += b;
    return total;
  }
};

/// p(j, r): money per unit of resource r at node j.
struct PriceVector {
  NodeMatrix values;

  double operator()(std::size_t j, std::size_t r) const {
    return values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r));
  }
};

/// Requests served per (service, node): rates(i, j). The proportional
/// allocation x(i)(j, r) = rates(i, j) * a(i)(j, r) is the only kind the
/// equilibrium programs produce.
using RequestRates = Eigen::MatrixXd;

inline void validate(const MarketInstance& inst) {
  if (inst.nodes == 0) throw InvalidInstance("instance needs at least one node");
  if (inst.resource_types == 0) throw InvalidInstance("instance needs at least one resource type");
  if (inst.services.empty()) throw InvalidInstance("instance needs at least one service");
  const auto m = static_cast<Eigen::Index>(inst.nodes);
  const auto r = static_cast<Eigen::Index>(inst.resource_types);
  if (inst.capacities.rows() != m || inst.capacities.cols() != r) {
    throw InvalidInstance("capacities must be nodes x resource_types");
  }
  if (!inst.capacities.allFinite() || (inst.capacities.array() <= 0.0).any()) {
    throw InvalidInstance("capacities must be finite and strictly positive");
  }
  for (std::size_t i = 0; i < inst.services.size(); ++i) {
    const auto& s = inst.services[i];
    const std::string tag = "service " + std::to_string(i) + ": ";
    if (!(s.budget > 0.0) || !std::isfinite(s.budget)) {
      throw InvalidInstance(tag + "budget must be finite and strictly positive");
    }
    if (!(s.utility_limit > 0.0)) throw InvalidInstance(tag + "utility_limit must be positive");
    if (s.base_demand.rows() != m || s.base_demand.cols() != r) {
      throw InvalidInstance(tag + "base_demand must be nodes x resource_types");
    }
    if (!s.base_demand.allFinite() || (s.base_demand.array() < 0.0).any()) {
      throw InvalidInstance(tag + "base_demand must be finite and nonnegative");
    }
    if (!s.allowed_nodes.empty() && s.allowed_nodes.size() != inst.nodes) {
      throw InvalidInstance(tag + "allowed_nodes mask has the wrong length");
    }
    bool any_node = false;
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      if (!s.allows(j)) continue;
      any_node = true;
      if (s.base_demand.row(static_cast<Eigen::Index>(j)).maxCoeff() <= 0.0) {
        throw InvalidInstance(tag + "node " + std::to_string(j) +
                              " is allowed but has an all-zero base demand (free utility)");
      }
    }
    if (!any_node) {
      throw DegenerateInstance(i, tag + "no allowed node, utility is zero everywhere");
    }
  }
}

/// Rescales every capacity to one and divides base demands accordingly.
inline MarketInstance normalize(MarketInstance inst) {
  validate(inst);
  for (auto& s : inst.services) {
    s.base_demand = s.base_demand.cwiseQuotient(inst.capacities);
  }
  inst.capacities.setOnes();
  return inst;
}

inline bool is_normalized(const MarketInstance& inst) {
  return (inst.capacities.array() == 1.0).all();
}

// -- utility arithmetic --------------------------------------------------------

/// Leontief requests at one node: min over r with a(j, r) > 0 of x(r) / a(j, r).
template <typename Row>
double per_node_utility(const ServiceSpec& service, std::size_t node, const Row& x_row) {
  if (!service.allows(node)) return 0.0;
  const auto j = static_cast<Eigen::Index>(node);
  double best = kInfinity;
  for (Eigen::Index r = 0; r < service.base_demand.cols(); ++r) {
    const double a = service.base_demand(j, r);
    if (a > 0.0) best = std::min(best, std::max(0.0, x_row(r)) / a);
  }
  return std::isfinite(best) ? best : 0.0;
}

/// Sum of per-node Leontief utilities, before truncation at the limit.
inline double raw_utility(const ServiceSpec& service, const NodeMatrix& x) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    total += per_node_utility(service, static_cast<std::size_t>(j), x.row(j));
  }
  return total;
}

inline double utility(const ServiceSpec& service, const NodeMatrix& x) {
  return std::min(raw_utility(service, x), service.utility_limit);
}

inline std::vector<double> utilities(const MarketInstance& inst, const Allocation& x) {
  std::vector<double> out(inst.num_services());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = utility(inst.services[i], x[i]);
  return out;
}

/// Price of one base-demand unit (one request) at a node.
inline double bundle_price(const ServiceSpec& service, std::size_t node, const PriceVector& p) {
  const auto j = static_cast<Eigen::Index>(node);
  return service.base_demand.row(j).dot(p.values.row(j));
}

struct BundlePrices {
  std::vector<double> per_node;  // NaN at disallowed nodes
  double cheapest = kInfinity;   // q_min over allowed nodes
  /// Some allowed node sells requests for free.
  bool degenerate = false;

  /// Requests per unit of money at the cheapest node (maximum bang-per-buck).
  double bang_per_buck() const { return cheapest > 0.0 ? 1.0 / cheapest : kInfinity; }
};

inline BundlePrices bundle_prices(const ServiceSpec& service, const PriceVector& p) {
  BundlePrices out;
  const auto m = static_cast<std::size_t>(service.base_demand.rows());
  out.per_node.assign(m, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < m; ++j) {
    if (!service.allows(j)) continue;
    const double q = bundle_price(service, j, p);
    out.per_node[j] = q;
    out.cheapest = std::min(out.cheapest, q);
    if (q <= 0.0) out.degenerate = true;
  }
  return out;
}

inline double spend(const NodeMatrix& x, const PriceVector& p) {
  return x.cwiseProduct(p.values).sum();
}

inline double spend(std::size_t service, const Allocation& x, const PriceVector& p) {
  return spend(x[service], p);
}

/// Expands request rates into the proportional allocation x = rate * a.
inline Allocation expand(const MarketInstance& inst, const RequestRates& rates) {
  Allocation x = Allocation::zeros(inst);
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    const auto& s = inst.services[i];
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      if (!s.allows(j)) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      x[i].row(jj) = rates(static_cast<Eigen::Index>(i), jj) * s.base_demand.row(jj);
    }
  }
  return x;
}

/// Per-node Leontief utilities of every service, the inverse of expand() on
/// proportional allocations.
inline RequestRates request_rates(const MarketInstance& inst, const Allocation& x) {
  RequestRates rates = RequestRates::Zero(static_cast<Eigen::Index>(inst.num_services()),
                                          static_cast<Eigen::Index>(inst.nodes));
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          per_node_utility(inst.services[i], j, x[i].row(static_cast<Eigen::Index>(j)));
    }
  }
  return rates;
}

inline bool is_feasible(const MarketInstance& inst, const Allocation& x,
                        double tol = kFeasibilityTol) {
  for (const auto& b : x.bundles) {
    if ((b.array() < -tol).any()) return false;
  }
  return ((x.load() - inst.capacities).array() <= tol).all();
}

}  // namespace fogmarket
