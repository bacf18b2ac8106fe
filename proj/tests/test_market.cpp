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

namespace fm = fogmarket;
using fm::NodeMatrix;

namespace {

fm::ServiceSpec single(std::initializer_list<double> a, double limit = fm::kInfinity) {
  fm::ServiceSpec s;
  s.base_demand = NodeMatrix(1, static_cast<Eigen::Index>(a.size()));
  Eigen::Index r = 0;
  for (double v : a) s.base_demand(0, r++) = v;
  s.utility_limit = limit;
  return s;
}

NodeMatrix row(std::initializer_list<double> v) {
  NodeMatrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index r = 0;
  for (double x : v) m(0, r++) = x;
  return m;
}

}  // namespace

TEST(PerNodeUtility, LeontiefMinimum) {
  EXPECT_DOUBLE_EQ(fm::per_node_utility(single({0.2, 0.1}), 0, row({0.4, 0.3}).row(0)), 2.0);
}

TEST(PerNodeUtility, ZeroAllocation) {
  EXPECT_DOUBLE_EQ(fm::per_node_utility(single({0.5}), 0, row({0.0}).row(0)), 0.0);
}

TEST(PerNodeUtility, ZeroDemandCoordinateIgnored) {
  EXPECT_DOUBLE_EQ(fm::per_node_utility(single({0.2, 0.0}), 0, row({0.4, 0.0}).row(0)), 2.0);
}

TEST(PerNodeUtility, DisallowedNodeGivesNothing) {
  auto s = single({0.5});
  s.allowed_nodes = {false};
  EXPECT_DOUBLE_EQ(fm::per_node_utility(s, 0, row({1.0}).row(0)), 0.0);
}

TEST(Utility, SumsNodesBelowLimit) {
  fm::ServiceSpec s;
  s.base_demand = fm::testing::column({1.0, 1.0});
  s.utility_limit = 10;
  EXPECT_DOUBLE_EQ(fm::utility(s, fm::testing::column({3, 4})), 7.0);
  s.utility_limit = 5;
  EXPECT_DOUBLE_EQ(fm::utility(s, fm::testing::column({3, 4})), 5.0);
}

TEST(Utility, TruncatedAtLimit) {
  EXPECT_DOUBLE_EQ(fm::utility(single({0.2}, 1.0), row({0.5})), 1.0);
}

TEST(BundlePrice, SingleProduct) {
  fm::PriceVector p{row({2.0})};
  EXPECT_NEAR(fm::bundle_price(single({0.2}), 0, p), 0.4, 1e-15);
}

TEST(BundlePrice, ReciprocalRatesOnTwoNodes) {
  const auto inst = fm::testing::two_node_market();
  fm::PriceVector p{fm::testing::column({3, 1})};
  const auto q = fm::bundle_prices(inst.services[0], p);
  EXPECT_NEAR(q.per_node[0], 0.375, 1e-15);
  EXPECT_NEAR(q.per_node[1], 0.5, 1e-15);
  EXPECT_NEAR(q.cheapest, 0.375, 1e-15);
  EXPECT_FALSE(q.degenerate);
}

TEST(BundlePrice, ZeroPricesAreDegenerate) {
  const auto inst = fm::testing::two_node_market();
  fm::PriceVector p{NodeMatrix::Zero(2, 1)};
  const auto q = fm::bundle_prices(inst.services[1], p);
  EXPECT_EQ(q.per_node[0], 0.0);
  EXPECT_EQ(q.per_node[1], 0.0);
  EXPECT_TRUE(q.degenerate);
}

TEST(Spend, SatiatedPairOutcomes) {
  const auto inst = fm::testing::satiated_pair();
  auto x = fm::Allocation::zeros(inst);
  EXPECT_EQ(fm::spend(0, x, fm::PriceVector{row({2.0})}), 0.0);
  x[0](0, 0) = 0.5;
  EXPECT_DOUBLE_EQ(fm::spend(0, x, fm::PriceVector{row({2.0})}), 1.0);
  x[0](0, 0) = 0.2;
  const double paid = fm::spend(0, x, fm::PriceVector{row({1.25})});
  EXPECT_NEAR(paid, 0.25, 1e-15);
  EXPECT_NEAR(inst.services[0].budget - paid, 0.75, 1e-15);
}

TEST(Normalize, DividesByCapacity) {
  fm::MarketInstance inst;
  inst.nodes = 1;
  inst.resource_types = 3;
  inst.capacities = row({16, 64, 2000});
  fm::ServiceSpec s;
  s.base_demand = row({0.2, 1.0, 20.0});
  inst.services.push_back(s);
  const auto norm = fm::normalize(inst);
  EXPECT_TRUE(fm::is_normalized(norm));
  EXPECT_NEAR(norm.services[0].base_demand(0, 0), 0.0125, 1e-15);
  EXPECT_NEAR(norm.services[0].base_demand(0, 1), 0.015625, 1e-15);
  EXPECT_NEAR(norm.services[0].base_demand(0, 2), 0.01, 1e-15);
}

TEST(Validate, RejectsFreeUtilityNode) {
  auto inst = fm::testing::satiated_pair();
  inst.services[0].base_demand(0, 0) = 0.0;
  EXPECT_THROW(fm::validate(inst), fm::InvalidInstance);
}

TEST(Validate, NamesServiceWithoutNodes) {
  auto inst = fm::testing::two_node_market();
  inst.services[1].allowed_nodes = {false, false};
  try {
    fm::validate(inst);
    FAIL() << "expected DegenerateInstance";
  } catch (const fm::DegenerateInstance& e) {
    EXPECT_EQ(e.service(), 1u);
  }
}

TEST(Validate, RejectsBadBudgetAndLimit) {
  auto inst = fm::testing::satiated_pair();
  inst.services[0].budget = 0.0;
  EXPECT_THROW(fm::validate(inst), fm::InvalidInstance);
  inst = fm::testing::satiated_pair();
  inst.services[1].utility_limit = 0.0;
  EXPECT_THROW(fm::validate(inst), fm::InvalidInstance);
}

TEST(Expand, RoundTripsThroughRequestRates) {
  const auto inst = fm::testing::random_instance(7);
  fm::RequestRates rates = fm::RequestRates::Random(static_cast<Eigen::Index>(inst.num_services()),
                                                    static_cast<Eigen::Index>(inst.nodes))
                               .cwiseAbs();
  const auto x = fm::expand(inst, rates);
  const auto back = fm::request_rates(inst, x);
  for (std::size_t i = 0; i < inst.num_services(); ++i) {
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      const double want = inst.services[i].allows(j) ? rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) : 0.0;
      EXPECT_NEAR(back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), want, 1e-12);
    }
  }
}

// Properties on random bundles.

class UtilityProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(UtilityProperties, HomogeneousWithoutLimit) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  auto inst = fm::testing::random_instance(GetParam());
  auto s = inst.services[0];
  s.utility_limit = fm::kInfinity;
  NodeMatrix x = NodeMatrix::NullaryExpr(s.base_demand.rows(), s.base_demand.cols(), [&] { return unif(rng); });
  const double alpha = unif(rng) + 0.1;
  EXPECT_NEAR(fm::utility(s, alpha * x), alpha * fm::utility(s, x), 1e-12 * (1 + fm::utility(s, x)));
}

TEST_P(UtilityProperties, MonotoneConcaveBounded) {
  std::mt19937_64 rng(GetParam() + 1000);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  const auto inst = fm::testing::random_instance(GetParam());
  for (const auto& s : inst.services) {
    auto draw = [&] {
      return NodeMatrix(NodeMatrix::NullaryExpr(s.base_demand.rows(), s.base_demand.cols(), [&] { return unif(rng); }));
    };
    const NodeMatrix x = draw(), y = draw();
    const NodeMatrix more = x + draw();
    EXPECT_GE(fm::utility(s, more), fm::utility(s, x) - 1e-12);
    const double lam = unif(rng) / 2.0;
    const double mid = fm::utility(s, lam * x + (1 - lam) * y);
    EXPECT_GE(mid, lam * fm::utility(s, x) + (1 - lam) * fm::utility(s, y) - 1e-12);
    EXPECT_LE(fm::utility(s, x), s.utility_limit);
    for (std::size_t j = 0; j < inst.nodes; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double pmid = fm::per_node_utility(s, j, (lam * x.row(jj) + (1 - lam) * y.row(jj)).eval());
      EXPECT_GE(pmid, lam * fm::per_node_utility(s, j, x.row(jj)) +
                          (1 - lam) * fm::per_node_utility(s, j, y.row(jj)) - 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, UtilityProperties, ::testing::Range<std::uint64_t>(1, 41));
