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
#include "fogmarket/opt/projection.hpp"
#include "fogmarket/opt/x_update.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace fogmarket {

/// Item k = j * R + r, the row-major flattening of a node matrix.
using ItemVector = Eigen::VectorXd;

/// Sum of v[lo, hi) by recursive halving. The reduction order depends only
/// on the number of vectors, never on threads or transports.
inline ItemVector tree_sum(const std::vector<ItemVector>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

inline ItemVector tree_sum(const std::vector<ItemVector>& v) {
  if (v.empty()) throw Error("tree_sum: no vectors");
  return tree_sum(v, 0, v.size());
}

/// Who runs the z- and dual updates.
enum class Aggregator { platform, peer };

/// Computes the exact mean of one vector per service.
class AveragingTransport {
 public:
  virtual ~AveragingTransport() = default;
  virtual ItemVector average(const std::vector<ItemVector>& submissions) = 0;
  virtual std::string name() const = 0;
};

class PlainAveraging final : public AveragingTransport {
 public:
  ItemVector average(const std::vector<ItemVector>& submissions) override {
    return tree_sum(submissions) / static_cast<double>(submissions.size());
  }
  std::string name() const override { return "plain"; }
};

struct AdmmOptions {
  double rho = 1.0;
  double gamma_primal = 1e-4;
  double gamma_dual = 1e-4;
  int max_iter = 5000;
  /// Worker threads for the x-updates; results do not depend on it.
  unsigned threads = 1;
  Aggregator aggregator = Aggregator::platform;
  bool keep_history = true;
};

struct IterationRecord {
  int t = 0;
  double r_primal = 0.0;
  double r_dual = 0.0;
  /// sum_i B_i ln(sum_j u_ij) at the current x-iterate.
  double objective = 0.0;
  std::vector<double> utilities;
};

struct AdmmState {
  int t = 0;
  std::vector<ItemVector> x;
  /// Request rates behind each x_i, one per node.
  std::vector<Eigen::VectorXd> rates;
  ItemVector x_bar;
  ItemVector z_bar;
  ItemVector p;
  double r_primal = kInfinity;
  double r_dual = kInfinity;
  /// Services whose last x-update hit the log floor.
  std::vector<bool> degenerate;
  std::vector<IterationRecord> history;
};

/// Thrown when a service's subproblem cannot be solved.
class AdmmError : public Error {
 public:
  AdmmError(std::size_t service, int iteration, const std::string& what)
      : Error("admm: service " + std::to_string(service) + " at iteration " +
              std::to_string(iteration) + ": " + what),
        service_(service),
        iteration_(iteration) {}
  std::size_t service() const { return service_; }
  int iteration() const { return iteration_; }

 private:
  std::size_t service_;
  int iteration_;
};

inline std::size_t num_items(const MarketInstance& inst) { return inst.nodes * inst.resource_types; }

inline ItemVector flatten(const NodeMatrix& m) {
  return Eigen::Map<const ItemVector>(m.data(), m.size());
}

inline NodeMatrix unflatten(const ItemVector& v, std::size_t nodes, std::size_t resources) {
  return Eigen::Map<const NodeMatrix>(v.data(), static_cast<Eigen::Index>(nodes),
                                      static_cast<Eigen::Index>(resources));
}

/// x_i = z = 1/N and p = 1 on every item.
inline AdmmState initial_state(const MarketInstance& inst) {
  validate(inst);
  const auto n = inst.num_services();
  const auto k = static_cast<Eigen::Index>(num_items(inst));
  const double share = 1.0 / static_cast<double>(n);
  AdmmState s;
  s.x.assign(n, ItemVector::Constant(k, share));
  s.rates.assign(n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.nodes)));
  s.x_bar = ItemVector::Constant(k, share);
  s.z_bar = ItemVector::Constant(k, share);
  s.p = ItemVector::Ones(k);
  s.degenerate.assign(n, false);
  return s;
}

namespace detail {

inline void for_each_service(std::size_t n, unsigned threads,
                             const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double admm_objective(const MarketInstance& inst, const AdmmState& s) {
  double f = 0.0;
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    f += inst.services[i].budget * std::log(std::max(s.rates[i].sum(), opt::kLogFloor));
  }
  return f;
}

}  // namespace detail

/// One Jacobi iteration: parallel x-updates, averaging, z clamp, dual ascent.
inline AdmmState admm_step(AdmmState s, const MarketInstance& inst, AveragingTransport& transport,
                           const AdmmOptions& opts = {}) {
  if (!(opts.rho > 0.0)) throw Error("admm: rho must be positive");
  const auto n = inst.num_services();
  const double rho = opts.rho;
  const ItemVector shift = -s.x_bar + s.z_bar - s.p / rho;

  std::vector<ItemVector> next(n);
  std::vector<char> degenerate(n, 0);
  detail::for_each_service(n, opts.threads, [&](std::size_t i) {
    const auto& svc = inst.services[i];
    opt::QuadLogSubproblem sub;
    sub.weight = svc.budget;
    sub.rho = rho;
    sub.base_demand = svc.base_demand;
    sub.allowed = svc.allowed_nodes;
    sub.center = unflatten(s.x[i] + shift, inst.nodes, inst.resource_types);
    sub.cap = svc.utility_limit;
    opt::XUpdateResult res;
    try {
      res = opt::solve_x_update(sub);
    } catch (const std::exception& e) {
      throw AdmmError(i, s.t, e.what());
    }
    next[i] = flatten(res.x);
    s.rates[i] = res.rates;
    degenerate[i] = res.degenerate;
  });
  s.x = std::move(next);
  for (std::size_t i = 0; i < n; ++i) s.degenerate[i] = degenerate[i] != 0;

  s.x_bar = transport.average(s.x);
  const ItemVector z_old = s.z_bar;
  s.z_bar = opt::clamp_projection(s.x_bar + s.p / rho, 1.0 / static_cast<double>(n));
  s.p += rho * (s.x_bar - s.z_bar);
  s.r_primal = std::sqrt(static_cast<double>(n)) * (s.z_bar - s.x_bar).norm();
  s.r_dual = rho * (s.z_bar - z_old).norm();
  ++s.t;

  if (opts.keep_history) {
    IterationRecord rec;
    rec.t = s.t;
    rec.r_primal = s.r_primal;
    rec.r_dual = s.r_dual;
    rec.objective = detail::admm_objective(inst, s);
    for (std::size_t i = 0; i < n; ++i) {
      rec.utilities.push_back(std::min(s.rates[i].sum(), inst.services[i].utility_limit));
    }
    s.history.push_back(std::move(rec));
  }
  return s;
}

struct AdmmResult {
  EquilibriumSolution solution;
  AdmmState state;
  bool converged = false;
};

/// Runs until both residuals are within tolerance or max_iter is reached.
/// A run that hits max_iter still returns its last iterate, flagged.
inline AdmmResult run_admm(const MarketInstance& inst, AveragingTransport& transport,
                           const AdmmOptions& opts = {}) {
  const auto started = std::chrono::steady_clock::now();
  AdmmResult out;
  AdmmState s = initial_state(inst);
  while (s.t < opts.max_iter) {
    s = admm_step(std::move(s), inst, transport, opts);
    if (s.r_primal <= opts.gamma_primal && s.r_dual <= opts.gamma_dual) {
      out.converged = true;
      break;
    }
  }
  RequestRates rates(static_cast<Eigen::Index>(inst.num_services()),
                     static_cast<Eigen::Index>(inst.nodes));
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    rates.row(static_cast<Eigen::Index>(i)) = s.rates[i].transpose();
  }
  SolverInfo info;
  info.method = "admm-" + transport.name() +
                (opts.aggregator == Aggregator::peer ? "-peer" : "-platform");
  info.iterations = s.t;
  info.primal_residual = s.r_primal;
  info.dual_residual = s.r_dual;
  info.converged = out.converged;
  info.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  PriceVector prices{unflatten(s.p, inst.nodes, inst.resource_types)};
  out.solution = polish(inst, std::move(rates), std::move(prices), std::move(info));
  out.state = std::move(s);
  return out;
}

inline AdmmResult run_admm(const MarketInstance& inst, const AdmmOptions& opts = {}) {
  PlainAveraging plain;
  return run_admm(inst, plain, opts);
}

/// Iteration trace: t, r_primal, r_dual, objective, u_0 .. u_{N-1}.
inline void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& history,
                            std::size_t services) {
  os << "t,r_primal,r_dual,objective";
  for (std::size_t i = 0; i < services; ++i) os << ",u_" << i;
  os << '\n';
  using detail::format_number;
  for (const auto& rec : history) {
    os << rec.t << ',' << format_number(rec.r_primal) << ',' << format_number(rec.r_dual) << ','
       << format_number(rec.objective);
    for (double u : rec.utilities) os << ',' << format_number(u);
    os << '\n';
  }
}

}  // namespace fogmarket
