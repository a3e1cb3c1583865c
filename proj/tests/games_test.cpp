#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cachegame/errors.hpp"
#include "cachegame/games.hpp"
#include "fixtures.hpp"

using namespace cachegame;
using namespace cachegame::games;

namespace {

Instance one_item_sure() {
  return make_single_request_instance(PreferenceMatrix({{1.0}, {1.0}}),
                                      {1, 1});
}

Instance sure_first_item() {
  return make_single_request_instance(PreferenceMatrix({{1, 0}, {1, 0}}),
                                      {1, 1});
}

Instance beta_instance(double beta) {
  return make_single_request_instance(beta_mixture_matrix(beta), {2, 2});
}

// Best r2 over (v, w) on the 1/res grid with user 1's cache held at u.
double grid_response_user2(const Instance& inst, const std::vector<double>& u,
                           int res) {
  const std::size_t n = inst.num_items();
  double best = -1.0;
  twouser::TwoUserPlacement pl{u, std::vector<double>(n, 0.0),
                               std::vector<double>(n, 0.0)};
  std::vector<int> vi(n, 0), wi(n, 0);
  // Odometer over v, then w with w <= min(u, v) and u + v - w <= 1.
  while (true) {
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) used += double(vi[i]) / res;
    if (used <= inst.buffers()[1] + 1e-12) {
      std::fill(wi.begin(), wi.end(), 0);
      while (true) {
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i) {
          pl.v[i] = double(vi[i]) / res;
          pl.w[i] = double(wi[i]) / res;
          ok = ok && pl.w[i] <= std::min(u[i], pl.v[i]) + 1e-12 &&
               u[i] + pl.v[i] - pl.w[i] <= 1.0 + 1e-12;
        }
        if (ok) best = std::max(best, twouser::expected_throughput(inst, pl).r2);
        std::size_t i = 0;
        while (i < n && wi[i] == vi[i]) wi[i++] = 0;
        if (i == n) break;
        ++wi[i];
      }
    }
    std::size_t i = 0;
    while (i < n && vi[i] == res) vi[i++] = 0;
    if (i == n) break;
    ++vi[i];
  }
  return best;
}

}  // namespace

TEST(BestResponse, FullCachingWhenDemandIsCertain) {
  auto inst = one_item_sure();
  auto br = best_response(inst, User1Fixed{{1.0}});
  EXPECT_NEAR(br.payoff, 1.0, 1e-9);
  EXPECT_NEAR(br.placement.v[0], 1.0, 1e-9);
  EXPECT_EQ(br.placement.u, std::vector<double>{1.0});
}

TEST(BestResponse, SkewedMatchesGridSearch) {
  auto inst = fixtures::skewed();
  const std::vector<double> u{1.0, 0.0};
  auto br = best_response(inst, User1Fixed{u});
  const double grid = grid_response_user2(inst, u, 64);
  EXPECT_NEAR(br.payoff, grid, 1e-6);
  auto t = twouser::expected_throughput(inst, br.placement);
  EXPECT_NEAR(t.r2, br.payoff, 1e-9);
}

TEST(BestResponse, EmptyOpponentBeatsPureCaching) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = fixtures::random_two_user(rng, 6);
    const std::size_t n = inst.num_items();
    auto br2 = best_response(inst, User1Fixed{std::vector<double>(n, 0.0)});
    EXPECT_GE(br2.payoff, pure_caching_throughput(inst.preferences().row(1),
                                                  inst.buffers()[1]) - 1e-9);
    auto br1 = best_response(inst, User2Fixed{std::vector<double>(n, 0.0)});
    EXPECT_GE(br1.payoff, pure_caching_throughput(inst.preferences().row(0),
                                                  inst.buffers()[0]) - 1e-9);
  }
}

TEST(FindPsne, DominantStrategy) {
  auto inst = sure_first_item();
  auto nash = find_psne(inst, 100, 1e-5, 0);
  ASSERT_TRUE(nash.converged);
  EXPECT_NEAR(nash.placement.u[0], 1.0, 1e-9);
  EXPECT_NEAR(nash.placement.v[0], 1.0, 1e-9);
  EXPECT_NEAR(nash.payoffs.r1, 1.0, 1e-9);
  EXPECT_NEAR(nash.payoffs.r2, 1.0, 1e-9);
}

TEST(FindPsne, SymmetricInstanceGivesEqualPayoffs) {
  auto inst = beta_instance(0.0);
  auto nash = find_psne(inst, 100, 1e-5, 0);
  ASSERT_TRUE(nash.converged);
  EXPECT_NEAR(nash.payoffs.r1, nash.payoffs.r2, 1e-6);
  // Swapping the users' roles must not change the equilibrium payoffs.
  twouser::TwoUserPlacement swapped{nash.placement.v, nash.placement.u,
                                    nash.placement.w};
  auto t = twouser::expected_throughput(inst, swapped);
  EXPECT_NEAR(t.r1, nash.payoffs.r2, 1e-6);
  EXPECT_NEAR(t.r2, nash.payoffs.r1, 1e-6);
  EXPECT_TRUE(verify_psne(inst, swapped, 1e-6));
}

TEST(FindPsne, DeterministicGivenSeed) {
  auto inst = fixtures::skewed();
  auto a = find_psne(inst, 100, 1e-5, 42);
  auto b = find_psne(inst, 100, 1e-5, 42);
  EXPECT_EQ(a.placement.u, b.placement.u);
  EXPECT_EQ(a.placement.v, b.placement.v);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(FindPsne, ConvergedRunsSatisfyEquilibriumAndEfficiencyBound) {
  std::mt19937_64 rng(21);
  int converged = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = fixtures::random_two_user(rng, 5);
    auto nash = find_psne(inst, 100, 1e-5, trial);
    if (!nash.converged) continue;
    ++converged;
    EXPECT_TRUE(verify_psne(inst, nash.placement, 1e-6)) << "trial " << trial;
    EXPECT_LE(nash.payoffs.r1 + nash.payoffs.r2,
              cooperative_total(inst) + 1e-6);
  }
  EXPECT_GT(converged, 20);
}

TEST(VerifyPsne, EmptyPlacementIsNotAnEquilibrium) {
  auto inst = fixtures::skewed();
  auto report = psne_report(inst, twouser::TwoUserPlacement::empty(2), 1e-6);
  EXPECT_FALSE(report.ok);
  EXPECT_GT(report.gain1, 1e-6);
}

TEST(VerifyPsne, FullCachingIsAnEquilibrium) {
  auto inst = fixtures::skewed(2, 2);
  EXPECT_TRUE(verify_psne(inst, {{1, 1}, {1, 1}, {1, 1}}, 1e-6));
}

TEST(CooperativeTotal, Examples) {
  EXPECT_GE(cooperative_total(fixtures::skewed()), 1.5 - 1e-6);
  EXPECT_NEAR(cooperative_total(fixtures::skewed(2, 2)), 2.0, 1e-9);
  // No caches: only common requests save, half an item for each user, so
  // each user gets 0.25 and the pair 0.5.
  const double same = 0.99 * 0.5 + 0.01 * 0.5;
  EXPECT_NEAR(cooperative_total(fixtures::skewed(0, 0)), 2 * 0.5 * same, 1e-9);
}

TEST(CooperativeTotal, DominatesPureCaching) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = fixtures::random_two_user(rng, 6);
    const double pure =
        pure_caching_throughput(inst.preferences().row(0), inst.buffers()[0]) +
        pure_caching_throughput(inst.preferences().row(1), inst.buffers()[1]);
    EXPECT_GE(cooperative_total(inst), pure - 1e-9);
  }
}

TEST(Allocate, NoSurplusKeepsNashPayoffs) {
  auto out = allocate(sure_first_item(), 100, 1e-5, 0);
  EXPECT_EQ(out.allocation.basis, AllocationBasis::NashBased);
  EXPECT_NEAR(out.allocation.total, 2.0, 1e-9);
  EXPECT_NEAR(out.allocation.r1c, 1.0, 1e-9);
  EXPECT_NEAR(out.allocation.r2c, 1.0, 1e-9);
}

TEST(Allocate, SplitSurplusIdentity) {
  auto a = split_surplus(3.0, {1.0, 1.5}, AllocationBasis::PureCachingBased);
  EXPECT_DOUBLE_EQ(a.r1c, 1.25);
  EXPECT_DOUBLE_EQ(a.r2c, 1.75);
  EXPECT_EQ(a.basis, AllocationBasis::PureCachingBased);
  auto b = split_surplus(2.5, {1.0, 1.5}, AllocationBasis::NashBased);
  EXPECT_DOUBLE_EQ(b.r1c, 1.0);
  EXPECT_DOUBLE_EQ(b.r2c, 1.5);
  EXPECT_STREQ(to_string(AllocationBasis::NashBased), "nash");
  EXPECT_STREQ(to_string(AllocationBasis::PureCachingBased), "pure_caching");
}

TEST(Allocate, ConcentratedUserDominates) {
  auto inst = beta_instance(0.5);
  auto out = allocate(inst, 100, 1e-5, 0);
  const auto& a = out.allocation;
  EXPECT_GT(a.r1c, a.r2c);
  EXPECT_NEAR(a.r1c + a.r2c, a.total, 1e-9);
  EXPECT_GE(a.r1c, a.baseline.r1 - 1e-9);
  EXPECT_GE(a.r2c, a.baseline.r2 - 1e-9);
  if (out.nash.converged) {
    EXPECT_GE(a.r1c, out.nash.payoffs.r1 - 1e-9);
    EXPECT_GE(a.r2c, out.nash.payoffs.r2 - 1e-9);
  }
}

TEST(Allocate, EfficientAndIndividuallyRational) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 15; ++trial) {
    auto inst = fixtures::random_two_user(rng, 5);
    auto out = allocate(inst, 100, 1e-5, trial);
    const auto& a = out.allocation;
    EXPECT_NEAR(a.r1c + a.r2c, a.total, 1e-9);
    EXPECT_GE(a.r1c, a.baseline.r1 - 1e-9);
    EXPECT_GE(a.r2c, a.baseline.r2 - 1e-9);
  }
}

TEST(Games, RequireTwoUsers) {
  auto inst = make_single_request_instance(fixtures::p4(), {1, 1, 1});
  EXPECT_THROW(cooperative_total(inst), InputError);
  EXPECT_THROW(find_psne(inst, 10, 1e-5, 0), InputError);
}
