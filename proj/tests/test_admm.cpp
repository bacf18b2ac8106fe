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

#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace fm = fogmarket;

TEST(TreeSum, FixedOrderMean) {
  std::vector<fm::ItemVector> v;
  for (int k = 1; k <= 5; ++k) v.push_back(fm::ItemVector::Constant(2, k));
  fm::PlainAveraging plain;
  EXPECT_TRUE(plain.average(v).isApprox(fm::ItemVector::Constant(2, 3.0)));
  EXPECT_THROW(fm::tree_sum({}), fm::Error);
}

TEST(InitialState, StartsAtEqualShares) {
  const auto inst = fm::testing::two_node_market();
  const auto s = fm::initial_state(inst);
  EXPECT_EQ(s.t, 0);
  EXPECT_EQ(s.x.size(), 2u);
  EXPECT_TRUE(s.x[1].isApprox(fm::ItemVector::Constant(2, 0.5)));
  EXPECT_TRUE(s.z_bar.isApprox(fm::ItemVector::Constant(2, 0.5)));
  EXPECT_TRUE(s.p.isApprox(fm::ItemVector::Ones(2)));
}

TEST(RunAdmm, LoneBuyer) {
  const auto inst = fm::testing::linear_market({{1.0}}, {1.0}, {fm::kInfinity});
  fm::AdmmOptions opts;
  opts.gamma_primal = opts.gamma_dual = 1e-8;
  const auto res = fm::run_admm(inst, opts);
  const auto oracle = fm::solve_geg(inst);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.solution.allocation[0](0, 0), 1.0, 1e-6);
  EXPECT_NEAR(res.solution.prices(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(res.solution.prices(0, 0), oracle.prices(0, 0), 1e-6);
}

TEST(RunAdmm, SatiatedPair) {
  fm::AdmmOptions opts;
  opts.gamma_primal = opts.gamma_dual = 1e-6;
  const auto res = fm::run_admm(fm::testing::satiated_pair(), opts);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.solution.prices(0, 0), 1.25, 1e-3);
  EXPECT_NEAR(res.solution.utilities[0], 1.0, 1e-3);
  EXPECT_NEAR(res.solution.utilities[1], 8.0, 1e-3);
  EXPECT_EQ(res.solution.info.iterations, res.state.t);
}

TEST(AdmmStep, FixedPointIsInvariant) {
  const auto inst = fm::testing::two_node_market();
  fm::AdmmOptions opts;
  opts.gamma_primal = opts.gamma_dual = 1e-13;
  opts.max_iter = 20000;
  auto res = fm::run_admm(inst, opts);
  ASSERT_TRUE(res.converged);
  fm::PlainAveraging plain;
  const auto next = fm::admm_step(res.state, inst, plain, opts);
  EXPECT_LE(next.r_primal, 1e-12);
  EXPECT_LE(next.r_dual, 1e-12);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LE((next.x[i] - res.state.x[i]).norm(), 1e-11);
  EXPECT_LE((next.p - res.state.p).norm(), 1e-11);
}

TEST(AdmmStep, ConsensusStaysFeasibleAndDualsShared) {
  const auto inst = fm::testing::random_instance(3);
  fm::PlainAveraging plain;
  auto s = fm::initial_state(inst);
  const double cap = 1.0 / static_cast<double>(inst.num_services());
  for (int t = 0; t < 50; ++t) {
    s = fm::admm_step(std::move(s), inst, plain);
    EXPECT_LE(s.z_bar.maxCoeff(), cap + 1e-12);
    EXPECT_EQ(s.p.size(), static_cast<Eigen::Index>(fm::num_items(inst)));
  }
  EXPECT_EQ(s.history.size(), 50u);
}

TEST(AdmmStep, RejectsNonPositiveRho) {
  const auto inst = fm::testing::satiated_pair();
  fm::PlainAveraging plain;
  fm::AdmmOptions opts;
  opts.rho = 0.0;
  EXPECT_THROW(fm::admm_step(fm::initial_state(inst), inst, plain, opts), fm::Error);
}

TEST(RunAdmm, IterationCapIsFlagged) {
  fm::AdmmOptions opts;
  opts.max_iter = 3;
  const auto res = fm::run_admm(fm::testing::two_node_market(), opts);
  EXPECT_FALSE(res.converged);
  EXPECT_FALSE(res.solution.info.converged);
  EXPECT_EQ(res.state.t, 3);
  EXPECT_EQ(res.solution.utilities.size(), 2u);
}

TEST(RunAdmm, ThreadCountDoesNotChangeTrajectory) {
  const auto inst = fm::testing::random_instance(17, {10, 5, 3});
  fm::AdmmOptions one, many;
  one.max_iter = many.max_iter = 200;
  many.threads = 4;
  const auto a = fm::run_admm(inst, one);
  const auto b = fm::run_admm(inst, many);
  ASSERT_EQ(a.state.t, b.state.t);
  EXPECT_EQ(a.state.p, b.state.p);
  for (std::size_t i = 0; i < inst.num_services(); ++i) EXPECT_EQ(a.state.x[i], b.state.x[i]);
}

TEST(RunAdmm, BaseCaseInstanceConverges) {
  fm::GeneratorConfig cfg;
  cfg.seed = 1;
  const auto res = fm::run_admm(fm::generate(cfg).instance);
  EXPECT_TRUE(res.converged);
  EXPECT_LT(res.state.t, 500);
}

TEST(RunAdmm, TraceCsv) {
  fm::AdmmOptions opts;
  opts.max_iter = 4;
  const auto res = fm::run_admm(fm::testing::satiated_pair(), opts);
  std::ostringstream os;
  fm::write_trace_csv(os, res.state.history, 2);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,r_primal,r_dual,objective,u_0,u_1");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

class AdmmAgreement : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(AdmmAgreement, MatchesCentralizedOracle) {
  const auto inst = fm::testing::random_instance(GetParam(), {10, 5, 3});
  fm::AdmmOptions opts;
  opts.gamma_primal = opts.gamma_dual = 1e-5;
  opts.max_iter = 20000;
  const auto res = fm::run_admm(inst, opts);
  const auto oracle = fm::solve_geg(inst);
  EXPECT_TRUE(res.converged);
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    EXPECT_NEAR(res.solution.utilities[i], oracle.utilities[i], 1e-2 * std::max(1.0, oracle.utilities[i]));
  }
}

TEST_P(AdmmAgreement, SuccessiveDifferencesShrink) {
  // With z_i = x_i + z_bar - x_bar the iteration is two-block ADMM, for which
  // rho * sum_i |dz_i|^2 + N |dp|^2 / rho never increases.
  const auto inst = fm::testing::random_instance(GetParam(), {10, 5, 3});
  const auto n = static_cast<double>(inst.num_services());
  fm::AdmmOptions opts;
  fm::PlainAveraging plain;
  auto s = fm::initial_state(inst);
  std::vector<fm::ItemVector> z_prev;
  fm::ItemVector p_prev;
  double previous = fm::kInfinity;
  for (int t = 0; t < 1000; ++t) {
    s = fm::admm_step(std::move(s), inst, plain, opts);
    std::vector<fm::ItemVector> z;
    for (const auto& xi : s.x) z.push_back(xi + s.z_bar - s.x_bar);
    if (t > 0) {
      double e = n * (s.p - p_prev).squaredNorm() / opts.rho;
      for (std::size_t i = 0; i < z.size(); ++i) e += opts.rho * (z[i] - z_prev[i]).squaredNorm();
      EXPECT_LE(e, previous * (1 + 1e-9) + 1e-24) << "iteration " << t;
      previous = e;
    }
    z_prev = std::move(z);
    p_prev = s.p;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AdmmAgreement, ::testing::Range<std::uint64_t>(1, 21));
