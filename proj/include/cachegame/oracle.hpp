#pragma once

#include <random>
#include <utility>

#include "cachegame/lp.hpp"
#include "cachegame/model.hpp"
#include "cachegame/twouser.hpp"

// Brute-force cross-checks. Every routine here is deliberately independent
// of the code path it validates.
namespace cachegame::oracle {

inline constexpr std::size_t kMaxEnumVars = 8;
inline constexpr std::size_t kMaxEnumRows = 12;
inline constexpr double kMaxGridPoints = 1e7;

// Solves the LP by enumerating every choice of n active constraints among
// the rows and the nonnegativity bounds. Unboundedness is detected from the
// extreme rays of the recession cone, enumerated the same way.
lp::Solution lp_vertex_enumerate(const lp::LinearProgram& prog,
                                 double tolerance = 1e-9);

struct GridSpec {
  int resolution = 1;  // fractions are multiples of 1 / resolution
};

// Largest r1 + r2 over all placements whose fractions lie on the grid.
double grid_best_sum(const Instance& inst, GridSpec grid);

// Chunk-level delivery for one outcome: pairs user-1-only chunks user 2
// wants with user-2-only chunks user 1 wants, XORs each pair, sends the rest
// uncoded, checks both users decode, and returns each user's share of the
// transmitted chunks in item units.
std::pair<double, double> bit_level_two_user_cost(
    const twouser::TwoUserPlacement& pl, const DemandOutcome& outcome,
    int chunks_per_item);

// Uniformly random box-feasible placement on the 1/resolution grid.
twouser::TwoUserPlacement sample_aligned_placement(std::size_t num_items,
                                                   int resolution,
                                                   std::mt19937_64& rng);

}  // namespace cachegame::oracle
