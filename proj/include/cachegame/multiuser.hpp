#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cachegame/model.hpp"

namespace cachegame::multiuser {

// Bit k set <=> user k belongs to the set. Supports up to kMaxUsers users.
using UserSet = std::uint32_t;
inline constexpr std::size_t kMaxUsers = 16;

inline int set_size(UserSet s) { return __builtin_popcount(s); }
inline bool contains(UserSet s, std::size_t k) { return (s >> k) & 1u; }

struct ChunkId {
  int item = 0;   // zero-based
  int chunk = 0;  // zero-based
  auto operator<=>(const ChunkId&) const = default;
};

// Uncoded cache contents, one sorted chunk list per user.
class CacheProfile {
 public:
  CacheProfile(int num_items, int chunks_per_item,
               std::vector<std::vector<ChunkId>> caches);

  std::size_t num_users() const { return caches_.size(); }
  int num_items() const { return num_items_; }
  int chunks_per_item() const { return chunks_per_item_; }
  const std::vector<ChunkId>& cache(std::size_t k) const { return caches_[k]; }
  // Users holding the chunk.
  UserSet holders(ChunkId c) const { return holders_[index(c)]; }
  bool holds(std::size_t k, ChunkId c) const {
    return contains(holders(c), k);
  }
  int index(ChunkId c) const { return c.item * chunks_per_item_ + c.chunk; }

 private:
  int num_items_;
  int chunks_per_item_;
  std::vector<std::vector<ChunkId>> caches_;
  std::vector<UserSet> holders_;
};

// Y sets keyed by (requesters, holders): chunks wanted and missing exactly at
// the requesters, held exactly by the holders.
struct SetSystem {
  std::map<std::pair<UserSet, UserSet>, std::vector<ChunkId>> y;
};

// Payload is the XOR of the listed chunks; a single term is sent uncoded.
struct CodedChunk {
  std::vector<ChunkId> terms;
};

// One pass of the grouping step: the audience split into groups of users
// with identical requests.
struct GroupRound {
  UserSet audience = 0;
  std::vector<UserSet> groups;
};

struct DeliverySchedule {
  std::map<UserSet, std::vector<CodedChunk>> messages;
  std::vector<double> per_user_cost;  // item units
  std::vector<GroupRound> rounds;
};

// Every user caches its most popular items: whole items for floor(b_k), then
// the leading chunks of the next item. Requires b_k * G integral.
CacheProfile popular_placement(const Instance& inst);

SetSystem build_set_system(const CacheProfile& profile,
                           const DemandOutcome& outcome);

// Union of Y[requesters, S] over all S containing `holders`, sorted.
std::vector<ChunkId> z_set(const SetSystem& sys, UserSet requesters,
                           UserSet holders);

// Every pair of groups (U_i, U \ U_i), (U_j, U \ U_j) in a round satisfies
// U_i subset of U \ U_j for i != j and U_i disjoint from U \ U_i.
bool groups_are_separable(const GroupRound& round);

DeliverySchedule deliver(const CacheProfile& profile,
                         const DemandOutcome& outcome);

struct DecodeResult {
  std::vector<ChunkId> recovered;  // requested chunks learned from messages
  // Per audience: number of new chunks this user learned from that message.
  std::map<UserSet, int> learned_per_message;
};

// Simulates user k's decoder to a fixpoint. Throws DecodingFailure if a
// requested chunk is left unresolved.
DecodeResult decode_with_trace(const CacheProfile& profile,
                               const DeliverySchedule& schedule,
                               const DemandOutcome& outcome, std::size_t user);

inline std::vector<ChunkId> decode(const CacheProfile& profile,
                                   const DeliverySchedule& schedule,
                                   const DemandOutcome& outcome,
                                   std::size_t user) {
  return decode_with_trace(profile, schedule, outcome, user).recovered;
}

struct Exact {};
struct MonteCarlo {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};
using ExpectationMode = std::variant<Exact, MonteCarlo>;

struct MultiuserThroughput {
  std::vector<double> throughput;
  // Only for Monte Carlo runs.
  std::optional<std::vector<double>> std_error;
};

inline constexpr std::size_t kMaxExactSupport = 1'000'000;

MultiuserThroughput expected_throughput_multiuser(const Instance& inst,
                                                  const ExpectationMode& mode);

}  // namespace cachegame::multiuser
