#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cachegame/errors.hpp"
#include "cachegame/multiuser.hpp"
#include "fixtures.hpp"

using namespace cachegame;
using namespace cachegame::multiuser;

namespace {

constexpr UserSet kUser1 = 1u;
constexpr UserSet kUser2 = 2u;

Instance one_user(std::vector<double> row, double b, int g) {
  return make_single_request_instance(
      PreferenceMatrix(std::vector<std::vector<double>>{row}), {b}, g);
}

// Two items A, B of two chunks; user 1 holds the first half of each, user 2
// the second half.
CacheProfile split_profile() {
  return CacheProfile(2, 2, {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}});
}

std::vector<ChunkId> missing_requested(const CacheProfile& profile,
                                       const DemandOutcome& outcome,
                                       std::size_t k) {
  std::vector<ChunkId> out;
  for (int n : outcome.requested[k]) {
    for (int g = 0; g < profile.chunks_per_item(); ++g) {
      if (!profile.holds(k, {n, g})) out.push_back({n, g});
    }
  }
  return out;
}

void check_schedule(const CacheProfile& profile, const DemandOutcome& outcome,
                    const DeliverySchedule& sched) {
  const std::size_t K = profile.num_users();
  const int G = profile.chunks_per_item();
  std::size_t sent = 0;
  std::vector<double> expect_cost(K, 0.0);
  for (const auto& [audience, msgs] : sched.messages) {
    ASSERT_NE(audience, 0u);
    sent += msgs.size();
    for (std::size_t k = 0; k < K; ++k) {
      if (contains(audience, k)) {
        expect_cost[k] += double(msgs.size()) / (set_size(audience) * G);
      }
    }
    for (const auto& c : msgs) ASSERT_FALSE(c.terms.empty());
  }
  double split_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    EXPECT_NEAR(sched.per_user_cost[k], expect_cost[k], 1e-12);
    split_total += sched.per_user_cost[k] * G;
  }
  EXPECT_NEAR(split_total, double(sent), 1e-9);

  for (const auto& round : sched.rounds) {
    EXPECT_TRUE(groups_are_separable(round));
  }

  for (std::size_t k = 0; k < K; ++k) {
    auto trace = decode_with_trace(profile, sched, outcome, k);
    auto want = missing_requested(profile, outcome, k);
    auto got = trace.recovered;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want) << "user " << k;
    for (const auto& [audience, msgs] : sched.messages) {
      if (!contains(audience, k)) continue;
      auto it = trace.learned_per_message.find(audience);
      const int learned = it == trace.learned_per_message.end() ? 0 : it->second;
      EXPECT_EQ(learned, int(msgs.size())) << "user " << k;
    }
  }
}

}  // namespace

TEST(PopularPlacement, Examples) {
  auto top = popular_placement(one_user({0.7, 0.2, 0.1, 0.0}, 1, 2));
  EXPECT_EQ(top.cache(0), (std::vector<ChunkId>{{0, 0}, {0, 1}}));

  auto tied = popular_placement(one_user({.25, .25, .25, .25}, 2, 1));
  EXPECT_EQ(tied.cache(0), (std::vector<ChunkId>{{0, 0}, {1, 0}}));

  auto frac = popular_placement(one_user({0.5, 0.3, 0.2}, 1.5, 2));
  EXPECT_EQ(frac.cache(0), (std::vector<ChunkId>{{0, 0}, {0, 1}, {1, 0}}));

  EXPECT_THROW(popular_placement(one_user({0.5, 0.5}, 0.3, 2)),
               NonIntegralChunkBudget);
}

TEST(SetSystem, SplitCacheExample) {
  auto profile = split_profile();
  DemandOutcome d{{{0}, {1}}};
  auto sys = build_set_system(profile, d);
  ASSERT_EQ(sys.y.size(), 2u);
  EXPECT_EQ(sys.y.at({kUser1, kUser2}), (std::vector<ChunkId>{{0, 1}}));
  EXPECT_EQ(sys.y.at({kUser2, kUser1}), (std::vector<ChunkId>{{1, 0}}));

  EXPECT_EQ(z_set(sys, kUser1, kUser2), (std::vector<ChunkId>{{0, 1}}));
  EXPECT_EQ(z_set(sys, kUser1, 0), (std::vector<ChunkId>{{0, 1}}));
  EXPECT_TRUE(z_set(sys, kUser1, kUser1 | kUser2).empty());
}

TEST(SetSystem, NothingToDeliverWhenCached) {
  CacheProfile full(2, 1, {{{0, 0}, {1, 0}}, {{0, 0}, {1, 0}}});
  DemandOutcome d{{{0}, {1}}};
  EXPECT_TRUE(build_set_system(full, d).y.empty());
  auto sched = deliver(full, d);
  EXPECT_TRUE(sched.messages.empty());
  EXPECT_EQ(sched.per_user_cost, (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(decode(full, sched, d, 0).empty());
}

TEST(SetSystem, SingleUser) {
  CacheProfile profile(3, 2, {{{1, 0}}});
  DemandOutcome d{{{1, 2}}};
  auto sys = build_set_system(profile, d);
  ASSERT_EQ(sys.y.size(), 1u);
  EXPECT_EQ(sys.y.at({kUser1, 0}),
            (std::vector<ChunkId>{{1, 1}, {2, 0}, {2, 1}}));
}

TEST(SetSystem, DisjointAndNeverServesHolders) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = fixtures::random_multiuser(rng);
    auto profile = popular_placement(inst);
    for (const auto& wo : inst.demands()) {
      auto sys = build_set_system(profile, wo.outcome);
      std::vector<ChunkId> all;
      for (const auto& [key, chunks] : sys.y) {
        EXPECT_EQ(key.first & key.second, 0u);
        EXPECT_NE(key.first, 0u);
        all.insert(all.end(), chunks.begin(), chunks.end());
      }
      std::sort(all.begin(), all.end());
      EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
    }
  }
}

TEST(Deliver, SplitCacheSendsOneXor) {
  auto profile = split_profile();
  DemandOutcome d{{{0}, {1}}};
  auto sched = deliver(profile, d);
  ASSERT_EQ(sched.messages.size(), 1u);
  const auto& msgs = sched.messages.at(kUser1 | kUser2);
  ASSERT_EQ(msgs.size(), 1u);
  auto terms = msgs[0].terms;
  std::sort(terms.begin(), terms.end());
  EXPECT_EQ(terms, (std::vector<ChunkId>{{0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(sched.per_user_cost[0], 0.25);
  EXPECT_DOUBLE_EQ(sched.per_user_cost[1], 0.25);
  EXPECT_EQ(decode(profile, sched, d, 0), (std::vector<ChunkId>{{0, 1}}));
  EXPECT_EQ(decode(profile, sched, d, 1), (std::vector<ChunkId>{{1, 0}}));
}

TEST(Deliver, UnicastFallback) {
  CacheProfile empty(3, 4, {{}});
  DemandOutcome d{{{2}}};
  auto sched = deliver(empty, d);
  const auto& msgs = sched.messages.at(kUser1);
  ASSERT_EQ(msgs.size(), 4u);
  for (const auto& c : msgs) EXPECT_EQ(c.terms.size(), 1u);
  EXPECT_DOUBLE_EQ(sched.per_user_cost[0], 1.0);
}

TEST(Deliver, TamperedScheduleFailsToDecode) {
  auto profile = split_profile();
  DemandOutcome d{{{0}, {1}}};
  auto sched = deliver(profile, d);
  sched.messages.clear();
  EXPECT_THROW(decode(profile, sched, d, 0), DecodingFailure);
}

TEST(Deliver, RandomInstancesDecodeFairlyAndAccountCosts) {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = fixtures::random_multiuser(rng);
    auto profile = popular_placement(inst);
    for (const auto& wo : inst.demands()) {
      check_schedule(profile, wo.outcome, deliver(profile, wo.outcome));
    }
  }
}

TEST(Deliver, MultiRequestOutcomes) {
  // Random caches and random multi-item requests, outside the popularity
  // placement.
  std::mt19937_64 rng(77);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 60; ++trial) {
    const int K = 1 + trial % 5, N = 1 + trial % 4, G = 1 + trial % 3;
    std::vector<std::vector<ChunkId>> caches(K);
    DemandOutcome d;
    d.requested.resize(K);
    for (int k = 0; k < K; ++k) {
      for (int n = 0; n < N; ++n) {
        if (coin(rng)) d.requested[k].push_back(n);
        for (int g = 0; g < G; ++g) {
          if (coin(rng)) caches[k].push_back({n, g});
        }
      }
    }
    CacheProfile profile(N, G, caches);
    check_schedule(profile, d, deliver(profile, d));
  }
}

TEST(ExpectedThroughput, FullBuffersRecoverRowSums) {
  auto inst = make_single_request_instance(fixtures::p4(), {4, 4, 4}, 2);
  auto r = expected_throughput_multiuser(inst, Exact{});
  for (double x : r.throughput) EXPECT_NEAR(x, 1.0, 1e-12);
  EXPECT_FALSE(r.std_error.has_value());
}

TEST(ExpectedThroughput, EmptyBuffersMatchMulticastOnlyEnumeration) {
  auto p = fixtures::p4();
  auto inst = make_single_request_instance(p, {0, 0, 0}, 3);
  auto r = expected_throughput_multiuser(inst, Exact{});
  // Each requested item is multicast once to everyone asking for it.
  std::vector<double> want(3, 0.0);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      for (int c = 0; c < 4; ++c) {
        const double prob = p(0, a) * p(1, b) * p(2, c);
        const int req[3] = {a, b, c};
        for (int k = 0; k < 3; ++k) {
          int share = 0;
          for (int j = 0; j < 3; ++j) share += req[j] == req[k];
          want[k] += prob * (1.0 - 1.0 / share);
        }
      }
    }
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.throughput[k], want[k], 1e-12);
}

TEST(ExpectedThroughput, MonteCarloAgreesWithExact) {
  auto inst = make_single_request_instance(fixtures::p4(), {1, 1, 1}, 2);
  auto exact = expected_throughput_multiuser(inst, Exact{});
  auto mc = expected_throughput_multiuser(inst, MonteCarlo{20000, 9});
  auto again = expected_throughput_multiuser(inst, MonteCarlo{20000, 9});
  ASSERT_TRUE(mc.std_error.has_value());
  EXPECT_EQ(mc.throughput, again.throughput);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(mc.throughput[k], exact.throughput[k],
                5 * (*mc.std_error)[k] + 1e-12);
    EXPECT_GT((*mc.std_error)[k], 0.0);
  }
}

TEST(ExpectedThroughput, NeverBelowPureCaching) {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = fixtures::random_multiuser(rng);
    auto r = expected_throughput_multiuser(inst, Exact{});
    for (std::size_t k = 0; k < inst.num_users(); ++k) {
      EXPECT_GE(r.throughput[k],
                pure_caching_throughput(inst.preferences().row(k),
                                        inst.buffers()[k]) - 1e-9);
    }
  }
}

TEST(ExpectedThroughput, OversizedSupportRejected) {
  std::vector<std::vector<double>> rows(7, std::vector<double>(8, 0.125));
  EXPECT_THROW(independent_single_demand(PreferenceMatrix(rows)),
               SupportTooLarge);
}
