#include "cachegame/multiuser.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "cachegame/errors.hpp"

namespace cachegame::multiuser {

namespace {

bool wants(const DemandOutcome& outcome, std::size_t k, int item) {
  const auto& s = outcome.requested[k];
  return std::binary_search(s.begin(), s.end(), item);
}

void check_outcome(const CacheProfile& profile, const DemandOutcome& outcome) {
  if (outcome.num_users() != profile.num_users()) {
    throw InvalidInstance("outcome and cache profile disagree on K");
  }
  for (const auto& s : outcome.requested) {
    for (int n : s) {
      if (n < 0 || n >= profile.num_items()) {
        throw InvalidInstance("requested item out of range");
      }
    }
  }
}

// Chunks sitting in Z[requesters, holders], ordered for consumption: widest
// holder set first, then by chunk id.
std::vector<std::pair<UserSet, ChunkId>> z_candidates(const SetSystem& sys,
                                                      UserSet requesters,
                                                      UserSet holders) {
  std::vector<std::pair<UserSet, ChunkId>> out;
  auto it = sys.y.lower_bound({requesters, 0});
  for (; it != sys.y.end() && it->first.first == requesters; ++it) {
    const UserSet s = it->first.second;
    if ((s & holders) != holders) continue;
    for (const auto& c : it->second) out.push_back({s, c});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int sa = set_size(a.first), sb = set_size(b.first);
    if (sa != sb) return sa > sb;
    return a.second < b.second;
  });
  return out;
}

void erase_chunk(SetSystem& sys, UserSet requesters, UserSet holders,
                 ChunkId c) {
  auto it = sys.y.find({requesters, holders});
  auto& v = it->second;
  v.erase(std::lower_bound(v.begin(), v.end(), c));
  if (v.empty()) sys.y.erase(it);
}

}  // namespace

CacheProfile::CacheProfile(int num_items, int chunks_per_item,
                           std::vector<std::vector<ChunkId>> caches)
    : num_items_(num_items),
      chunks_per_item_(chunks_per_item),
      caches_(std::move(caches)),
      holders_(static_cast<std::size_t>(num_items) * chunks_per_item, 0) {
  if (caches_.empty() || caches_.size() > kMaxUsers) {
    throw InvalidInstance("multiuser engine supports 1.." +
                          std::to_string(kMaxUsers) + " users");
  }
  for (std::size_t k = 0; k < caches_.size(); ++k) {
    auto& c = caches_[k];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (const auto& id : c) {
      if (id.item < 0 || id.item >= num_items_ || id.chunk < 0 ||
          id.chunk >= chunks_per_item_) {
        throw InvalidInstance("cached chunk out of range");
      }
      holders_[index(id)] |= UserSet{1} << k;
    }
  }
}

CacheProfile popular_placement(const Instance& inst) {
  const int g = inst.catalog().chunks_per_item;
  const int n_items = inst.catalog().num_items;
  std::vector<std::vector<ChunkId>> caches(inst.num_users());
  for (std::size_t k = 0; k < inst.num_users(); ++k) {
    const double budget = inst.buffers()[k] * g;
    const double rounded = std::round(budget);
    if (std::abs(budget - rounded) > 1e-9) {
      throw NonIntegralChunkBudget("user " + std::to_string(k) + " has b*G = " +
                                   std::to_string(budget));
    }
    int remaining = static_cast<int>(rounded);
    for (int item : popularity_order(inst.preferences().row(k))) {
      for (int c = 0; c < g && remaining > 0; ++c, --remaining) {
        caches[k].push_back({item, c});
      }
      if (remaining == 0) break;
    }
  }
  return CacheProfile(n_items, g, std::move(caches));
}

SetSystem build_set_system(const CacheProfile& profile,
                           const DemandOutcome& outcome) {
  check_outcome(profile, outcome);
  SetSystem sys;
  const std::size_t k_users = profile.num_users();
  for (int n = 0; n < profile.num_items(); ++n) {
    for (int c = 0; c < profile.chunks_per_item(); ++c) {
      const ChunkId id{n, c};
      const UserSet holders = profile.holders(id);
      UserSet requesters = 0;
      for (std::size_t k = 0; k < k_users; ++k) {
        if (wants(outcome, k, n) && !contains(holders, k)) {
          requesters |= UserSet{1} << k;
        }
      }
      if (requesters != 0) sys.y[{requesters, holders}].push_back(id);
    }
  }
  return sys;
}

std::vector<ChunkId> z_set(const SetSystem& sys, UserSet requesters,
                           UserSet holders) {
  std::vector<ChunkId> out;
  for (const auto& [key, chunks] : sys.y) {
    if (key.first == requesters && (key.second & holders) == holders) {
      out.insert(out.end(), chunks.begin(), chunks.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool groups_are_separable(const GroupRound& round) {
  for (std::size_t i = 0; i < round.groups.size(); ++i) {
    const UserSet ui = round.groups[i];
    if ((ui & ~round.audience) != 0) return false;
    for (std::size_t j = 0; j < round.groups.size(); ++j) {
      const UserSet vj = round.audience & ~round.groups[j];
      if (i == j) {
        if ((ui & vj) != 0) return false;
      } else if ((ui & vj) != ui) {
        return false;
      }
    }
  }
  return true;
}

DeliverySchedule deliver(const CacheProfile& profile,
                         const DemandOutcome& outcome) {
  SetSystem sys = build_set_system(profile, outcome);
  const std::size_t k_users = profile.num_users();
  const UserSet everyone = (UserSet{1} << k_users) - 1;
  DeliverySchedule sched;

  for (int size = static_cast<int>(k_users); size >= 1; --size) {
    for (UserSet audience = 1; audience <= everyone; ++audience) {
      if (set_size(audience) != size) continue;

      // Users with identical request sets share a group; groups are ordered
      // by their lowest member.
      GroupRound round{audience, {}};
      std::vector<std::size_t> leader;
      for (std::size_t k = 0; k < k_users; ++k) {
        if (!contains(audience, k)) continue;
        std::size_t g = 0;
        while (g < leader.size() &&
               outcome.requested[leader[g]] != outcome.requested[k]) {
          ++g;
        }
        if (g == leader.size()) {
          leader.push_back(k);
          round.groups.push_back(0);
        }
        round.groups[g] |= UserSet{1} << k;
      }

      std::vector<std::vector<std::pair<UserSet, ChunkId>>> picks;
      std::size_t t_max = SIZE_MAX;
      for (UserSet group : round.groups) {
        picks.push_back(z_candidates(sys, group, audience & ~group));
        t_max = std::min(t_max, picks.back().size());
      }
      sched.rounds.push_back(round);
      if (t_max == 0) continue;

      auto& msg = sched.messages[audience];
      for (std::size_t t = 0; t < t_max; ++t) {
        CodedChunk coded;
        for (const auto& p : picks) coded.terms.push_back(p[t].second);
        msg.push_back(std::move(coded));
      }
      for (std::size_t j = 0; j < round.groups.size(); ++j) {
        for (std::size_t t = 0; t < t_max; ++t) {
          erase_chunk(sys, round.groups[j], picks[j][t].first,
                      picks[j][t].second);
        }
      }
    }
  }

  // Anything still pending goes out uncoded to its exact requester set.
  for (const auto& [key, chunks] : sys.y) {
    auto& msg = sched.messages[key.first];
    for (const auto& c : chunks) msg.push_back(CodedChunk{{c}});
  }

  sched.per_user_cost.assign(k_users, 0.0);
  const double g = profile.chunks_per_item();
  for (const auto& [audience, msgs] : sched.messages) {
    const double share =
        static_cast<double>(msgs.size()) / (set_size(audience) * g);
    for (std::size_t k = 0; k < k_users; ++k) {
      if (contains(audience, k)) sched.per_user_cost[k] += share;
    }
  }
  return sched;
}

DecodeResult decode_with_trace(const CacheProfile& profile,
                               const DeliverySchedule& schedule,
                               const DemandOutcome& outcome,
                               std::size_t user) {
  check_outcome(profile, outcome);
  if (user >= profile.num_users()) throw InvalidInstance("user out of range");

  std::set<ChunkId> known(profile.cache(user).begin(),
                          profile.cache(user).end());
  DecodeResult res;
  std::vector<std::pair<UserSet, const CodedChunk*>> pending;
  for (const auto& [audience, msgs] : schedule.messages) {
    if (!contains(audience, user)) continue;
    res.learned_per_message[audience] = 0;
    for (const auto& m : msgs) pending.push_back({audience, &m});
  }

  bool progress = true;
  while (progress) {
    progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const ChunkId* unknown = nullptr;
      int missing = 0;
      for (const auto& term : it->second->terms) {
        if (!known.contains(term)) {
          ++missing;
          unknown = &term;
        }
      }
      if (missing <= 1) {
        if (missing == 1) {
          known.insert(*unknown);
          ++res.learned_per_message[it->first];
          progress = true;
        }
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
  }

  for (int n : outcome.requested[user]) {
    for (int c = 0; c < profile.chunks_per_item(); ++c) {
      const ChunkId id{n, c};
      if (profile.holds(user, id)) continue;
      if (!known.contains(id)) {
        throw DecodingFailure("user " + std::to_string(user) +
                              " cannot recover chunk " + std::to_string(n) +
                              ":" + std::to_string(c));
      }
      res.recovered.push_back(id);
    }
  }
  return res;
}

MultiuserThroughput expected_throughput_multiuser(const Instance& inst,
                                                  const ExpectationMode& mode) {
  const auto profile = popular_placement(inst);
  const std::size_t k_users = inst.num_users();
  const auto& support = inst.demands().support();
  MultiuserThroughput out;
  out.throughput.resize(k_users);

  if (std::holds_alternative<Exact>(mode)) {
    if (support.size() > kMaxExactSupport) {
      throw SupportTooLarge("exact expectation over " +
                            std::to_string(support.size()) + " outcomes");
    }
    std::vector<double> cost(k_users, 0.0);
    for (const auto& wo : support) {
      const auto sched = deliver(profile, wo.outcome);
      for (std::size_t k = 0; k < k_users; ++k) {
        cost[k] += wo.prob * sched.per_user_cost[k];
      }
    }
    for (std::size_t k = 0; k < k_users; ++k) {
      out.throughput[k] = inst.expected_requests(k) - cost[k];
    }
    return out;
  }

  const auto& mc = std::get<MonteCarlo>(mode);
  if (mc.samples < 2) throw InputError("Monte Carlo needs at least 2 samples");
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& wo : support) cumulative.push_back(acc += wo.prob);
  std::mt19937_64 rng(mc.seed);
  std::uniform_real_distribution<double> unit(0.0, acc);

  std::vector<double> mean(k_users, 0.0), m2(k_users, 0.0);
  for (std::size_t s = 0; s < mc.samples; ++s) {
    auto pos = std::upper_bound(cumulative.begin(), cumulative.end(),
                                unit(rng)) - cumulative.begin();
    pos = std::min<std::ptrdiff_t>(pos, support.size() - 1);
    const auto sched = deliver(profile, support[pos].outcome);
    // Welford running variance.
    for (std::size_t k = 0; k < k_users; ++k) {
      const double x = sched.per_user_cost[k];
      const double delta = x - mean[k];
      mean[k] += delta / static_cast<double>(s + 1);
      m2[k] += delta * (x - mean[k]);
    }
  }
  out.std_error.emplace(k_users);
  const auto n = static_cast<double>(mc.samples);
  for (std::size_t k = 0; k < k_users; ++k) {
    out.throughput[k] = inst.expected_requests(k) - mean[k];
    (*out.std_error)[k] = std::sqrt(m2[k] / (n - 1.0) / n);
  }
  return out;
}

}  // namespace cachegame::multiuser
