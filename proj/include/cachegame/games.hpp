#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "cachegame/lp.hpp"
#include "cachegame/model.hpp"
#include "cachegame/twouser.hpp"

namespace cachegame::games {

using twouser::ThroughputPoint;
using twouser::TwoUserPlacement;

struct User1Fixed {
  std::vector<double> u;
};
struct User2Fixed {
  std::vector<double> v;
};
// Which user's cache vector is held fixed; the other user responds.
using FixedSide = std::variant<User1Fixed, User2Fixed>;

struct BestResponse {
  TwoUserPlacement placement;  // includes the fixed vector
  double payoff = 0.0;         // responder's optimal throughput
};

// The two-user placement game. Each player owns its cache vector; the
// shared fraction w and the pairing variables are chosen by whichever
// player is optimizing. Holds the LP data so repeated responses are cheap.
class PlacementGame {
 public:
  explicit PlacementGame(const Instance& inst,
                         lp::SimplexOptions options = {});

  const Instance& instance() const { return inst_; }

  BestResponse respond(const FixedSide& fixed) const;

  // Best payoff for `user` (0 or 1) over (w, z) with both cache vectors fixed.
  double shared_optimum(std::span<const double> u, std::span<const double> v,
                        int user) const;

 private:
  BestResponse solve_with(std::span<const std::pair<std::size_t, double>> fixed,
                          const twouser::AffineForm& objective) const;

  const Instance& inst_;
  lp::SimplexOptions options_;
  twouser::ThroughputForms forms_;
  lp::LinearProgram polytope_;
};

BestResponse best_response(const Instance& inst, const FixedSide& fixed);

struct NashResult {
  TwoUserPlacement placement;
  ThroughputPoint payoffs;
  bool converged = false;
  int iterations = 0;
};

// Alternating best responses from a random user-1 cache. Stops when
// ||u* - u**|| + ||w* - w**|| <= eps (Euclidean) or after max_iters rounds.
NashResult find_psne(const Instance& inst, int max_iters, double eps,
                     std::uint64_t seed);

struct PsneReport {
  bool ok = false;
  double gain1 = 0.0;       // best-response improvement available to user 1
  double gain2 = 0.0;       // ... to user 2
  double shared_gap1 = 0.0; // private (w, z) optimum minus payoff, user 1
  double shared_gap2 = 0.0;
};

PsneReport psne_report(const Instance& inst, const TwoUserPlacement& pl,
                       double tol);

inline bool verify_psne(const Instance& inst, const TwoUserPlacement& pl,
                        double tol) {
  return psne_report(inst, pl, tol).ok;
}

// Largest r1 + r2 over the uncoded, absolutely fair domain.
double cooperative_total(const Instance& inst);

enum class AllocationBasis { NashBased, PureCachingBased };

const char* to_string(AllocationBasis b);

struct Allocation {
  double r1c = 0.0;
  double r2c = 0.0;
  AllocationBasis basis = AllocationBasis::NashBased;
  double total = 0.0;
  ThroughputPoint baseline;  // Nash payoffs or pure-caching throughputs
};

// Splits the cooperative surplus equally on top of a baseline.
Allocation split_surplus(double total, ThroughputPoint baseline,
                         AllocationBasis basis);

struct AllocationOutcome {
  Allocation allocation;
  NashResult nash;
};

AllocationOutcome allocate(const Instance& inst, int max_iters, double eps,
                           std::uint64_t seed);

}  // namespace cachegame::games
