#include <gtest/gtest.h>

#include <random>

#include "cachegame/errors.hpp"
#include "cachegame/games.hpp"
#include "cachegame/oracle.hpp"
#include "fixtures.hpp"

using namespace cachegame;

TEST(VertexEnumeration, SingleBoundAndInfeasible) {
  lp::LinearProgram bound(1);
  bound.objective = {1.0};
  bound.add_row({{0, 1.0}}, 1.0);
  auto e = oracle::lp_vertex_enumerate(bound);
  auto s = lp::solve(bound);
  ASSERT_EQ(e.status, lp::Status::Optimal);
  EXPECT_EQ(e.value, s.value);
  EXPECT_EQ(e.x, s.x);

  lp::LinearProgram infeasible(1);
  infeasible.objective = {1.0};
  infeasible.add_row({{0, 1.0}}, -1.0);
  EXPECT_EQ(oracle::lp_vertex_enumerate(infeasible).status,
            lp::Status::Infeasible);
}

TEST(VertexEnumeration, DetectsUnboundedRay) {
  lp::LinearProgram prog(2);
  prog.objective = {1.0, 1.0};
  prog.add_row({{0, 1.0}, {1, -1.0}}, 1.0);
  EXPECT_EQ(oracle::lp_vertex_enumerate(prog).status, lp::Status::Unbounded);
}

TEST(VertexEnumeration, GuardsSize) {
  EXPECT_THROW(oracle::lp_vertex_enumerate(lp::LinearProgram(9)), TooLarge);
  lp::LinearProgram tall(2);
  for (int i = 0; i < 13; ++i) tall.add_row({{0, 1.0}}, 1.0);
  EXPECT_THROW(oracle::lp_vertex_enumerate(tall), TooLarge);
}

TEST(GridBestSum, SkewedHalfGridFindsSplitPoint) {
  EXPECT_GE(oracle::grid_best_sum(fixtures::skewed(), {2}), 1.5 - 1e-12);
}

TEST(GridBestSum, EmptyBuffers) {
  auto inst = fixtures::skewed(0, 0);
  auto empty = twouser::expected_throughput(inst, twouser::TwoUserPlacement::empty(2));
  EXPECT_DOUBLE_EQ(oracle::grid_best_sum(inst, {8}), empty.r1 + empty.r2);
}

TEST(GridBestSum, BracketsCooperativeTotal) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = fixtures::random_two_user(rng, 2);
    const double coop = games::cooperative_total(inst);
    const double grid = oracle::grid_best_sum(inst, {8});
    EXPECT_LE(grid, coop + 1e-6);
    // Lipschitz slack c N / R with c = 3.
    EXPECT_GE(grid, coop - 3.0 * 2 / 8);
  }
}

TEST(GridBestSum, GuardsSize) {
  auto inst = fixtures::domain_instance(3);
  EXPECT_THROW(oracle::grid_best_sum(inst, {8}), TooLarge);
}

TEST(BitLevel, Examples) {
  auto split = oracle::bit_level_two_user_cost({{1, 0}, {0, 1}, {0, 0}},
                                               {{{1}, {0}}}, 2);
  EXPECT_DOUBLE_EQ(split.first, 0.5);
  EXPECT_DOUBLE_EQ(split.second, 0.5);
  auto shared = oracle::bit_level_two_user_cost(
      twouser::TwoUserPlacement::empty(1), {{{0}, {0}}}, 1);
  EXPECT_DOUBLE_EQ(shared.first, 0.5);
  EXPECT_DOUBLE_EQ(shared.second, 0.5);
  EXPECT_THROW(oracle::bit_level_two_user_cost({{0.3}, {0}, {0}},
                                               {{{0}, {0}}}, 2),
               MisalignedPlacement);
}

TEST(BitLevel, EqualsClosedFormOnGrid) {
  std::mt19937_64 rng(808);
  const int G = 8;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    auto pl = oracle::sample_aligned_placement(n, G, rng);
    twouser::check_box(pl);
    // All single-request outcomes plus a few multi-item ones.
    std::vector<DemandOutcome> outcomes;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        outcomes.push_back({{{int(a)}, {int(b)}}});
      }
    }
    ItemSet all;
    for (std::size_t i = 0; i < n; ++i) all.push_back(int(i));
    outcomes.push_back({{all, {0}}});
    outcomes.push_back({{all, all}});
    outcomes.push_back({{{}, all}});
    for (const auto& o : outcomes) {
      auto bits = oracle::bit_level_two_user_cost(pl, o, G);
      auto closed = twouser::outcome_cost(pl, o);
      EXPECT_NEAR(bits.first, closed.first, 1e-12);
      EXPECT_NEAR(bits.second, closed.second, 1e-12);
    }
  }
}
