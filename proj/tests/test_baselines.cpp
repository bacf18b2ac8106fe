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

#include <numeric>

namespace fm = fogmarket;

namespace {

double total(const std::vector<double>& u) { return std::accumulate(u.begin(), u.end(), 0.0); }
double least(const std::vector<double>& u) { return *std::min_element(u.begin(), u.end()); }

}  // namespace

TEST(SolveProp, BudgetShares) {
  fm::GeneratorConfig cfg;
  cfg.nodes = 3;
  const auto inst = fm::generate(cfg).instance;
  const auto x = fm::solve_prop(inst);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_TRUE(x[i].isApprox(fm::NodeMatrix::Constant(3, 3, 0.125)));

  const auto g = fm::testing::two_node_market();
  const auto xg = fm::solve_prop(g);
  EXPECT_DOUBLE_EQ(xg[0](0, 0), 0.75);
  EXPECT_DOUBLE_EQ(xg[1](1, 0), 0.25);

  const auto solo = fm::testing::linear_market({{2.0, 3.0}}, {5.0}, {fm::kInfinity});
  EXPECT_TRUE(fm::solve_prop(solo)[0].isApprox(solo.capacities));
}

TEST(SolveSwm, TwoNodeMarket) {
  const auto inst = fm::testing::two_node_market();
  const auto u = fm::utilities(inst, fm::solve_swm(inst));
  EXPECT_NEAR(total(u), 7.375, 1e-9);
  EXPECT_NEAR(u[0], 1.0, 1e-9);
  EXPECT_NEAR(u[1], 6.375, 1e-9);
}

TEST(SolveSwm, SoleClaimant) {
  auto inst = fm::testing::random_instance(11);
  inst.services.resize(1);
  inst.services[0].utility_limit = fm::kInfinity;
  inst.services[0].allowed_nodes.clear();
  double want = 0.0;
  for (std::size_t j = 0; j < inst.nodes; ++j) {
    want += fm::per_node_utility(inst.services[0], j, inst.capacities.row(static_cast<Eigen::Index>(j)));
  }
  EXPECT_NEAR(fm::utilities(inst, fm::solve_swm(inst))[0], want, 1e-8 * want);
}

TEST(SolveSwm, IdenticalServicesShareTheOptimum) {
  auto inst = fm::testing::random_instance(12);
  inst.services.resize(1);
  inst.services[0].utility_limit = fm::kInfinity;
  const double solo = fm::utilities(inst, fm::solve_swm(inst))[0];
  inst.services.push_back(inst.services[0]);
  inst.services.push_back(inst.services[0]);
  EXPECT_NEAR(total(fm::utilities(inst, fm::solve_swm(inst))), solo, 1e-8 * solo);
}

TEST(SolveMm, TwoIdenticalServicesSplitOneNode) {
  const auto inst = fm::testing::linear_market({{4.0}, {4.0}}, {1, 1}, {fm::kInfinity, fm::kInfinity});
  const auto u = fm::utilities(inst, fm::solve_mm(inst));
  EXPECT_NEAR(u[0], 2.0, 1e-9);
  EXPECT_NEAR(u[1], 2.0, 1e-9);
}

TEST(SolveMm, TwoNodeMarketMatchesVertexEnumeration) {
  const auto inst = fm::testing::two_node_market();
  auto w = fm::detail::build_welfare_lp(inst, 1);
  const Eigen::Index floor_col = w.first_extra;
  w.lp.objective(floor_col) = 1.0;
  for (std::size_t i = 0; i < 2; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(w.lp.num_vars());
    row(floor_col) = 1.0;
    row(w.utility_col(i)) = -1.0;
    w.lp.add_ineq(row, 0.0);
  }
  const auto oracle = fm::testing::vertex_enumeration(w.lp);
  ASSERT_TRUE(oracle.has_value());
  EXPECT_NEAR(*oracle, 1.0, 1e-9);
  EXPECT_NEAR(least(fm::utilities(inst, fm::solve_mm(inst))), *oracle, 1e-8);
}

TEST(SchemeId, ParseRoundTrip) {
  for (auto s : fm::kAllSchemes) EXPECT_EQ(fm::parse_scheme(fm::to_string(s)), s);
  EXPECT_FALSE(fm::parse_scheme("drf").has_value());
}

class SchemeOrdering : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SchemeOrdering, WelfareAndMaxMinBounds) {
  const auto inst = fm::testing::random_instance(GetParam());
  std::vector<std::vector<double>> u;
  for (auto s : fm::kAllSchemes) {
    const auto res = fm::run_scheme(inst, s);
    EXPECT_TRUE(fm::is_feasible(inst, res.allocation, 1e-6)) << fm::to_string(s);
    for (std::size_t i = 0; i < inst.num_services(); ++i) {
      EXPECT_LE(res.utilities[i], inst.services[i].utility_limit);
    }
    u.push_back(res.utilities);
  }
  const auto& swm = u[3];
  const auto& mm = u[4];
  for (const auto& other : u) {
    EXPECT_GE(total(swm), total(other) - 1e-7 * std::max(1.0, total(other)));
    EXPECT_GE(least(mm), least(other) - 1e-7 * std::max(1.0, least(other)));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SchemeOrdering, ::testing::Range<std::uint64_t>(1, 41));

// Total-utility ordering GEG >= MM on the catalog-generated instances.
TEST(SchemeOrdering, GegTotalAtLeastMmOnGeneratedInstances) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    fm::GeneratorConfig cfg;
    cfg.nodes = 10;
    cfg.services = 4;
    cfg.seed = seed;
    const auto inst = fm::generate(cfg).instance;
    const double geg = total(fm::run_scheme(inst, fm::SchemeId::geg).utilities);
    const double mm = total(fm::run_scheme(inst, fm::SchemeId::mm).utilities);
    EXPECT_GE(geg, mm - 1e-6 * mm) << "seed " << seed;
  }
}
