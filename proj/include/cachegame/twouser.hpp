#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cachegame/lp.hpp"
#include "cachegame/model.hpp"

namespace cachegame::twouser {

// Per-item cached fractions for two users under uncoded placement.
//   u[n]  fraction of item n held by user 1
//   v[n]  fraction of item n held by user 2
//   w[n]  fraction held by both
struct TwoUserPlacement {
  std::vector<double> u, v, w;

  static TwoUserPlacement empty(std::size_t num_items) {
    return {std::vector<double>(num_items, 0.0),
            std::vector<double>(num_items, 0.0),
            std::vector<double>(num_items, 0.0)};
  }
  std::size_t num_items() const { return u.size(); }
};

inline constexpr double kPlacementTolerance = 1e-9;

// Throws InvalidPlacement unless 0 <= w <= min(u, v), u, v <= 1 and
// u + v - w <= 1 item-wise (within kPlacementTolerance).
void check_box(const TwoUserPlacement& pl);
// check_box plus the two buffer budgets.
void check_placement(const TwoUserPlacement& pl, const BufferSpec& buffers);

struct ExclusiveFractions {
  std::vector<double> only1, only2, both, none;
};

ExclusiveFractions exclusive_fractions(const TwoUserPlacement& pl);

struct ThroughputPoint {
  double r1 = 0.0;
  double r2 = 0.0;
};

// Delivery cost borne by each user for one demand outcome when every
// pairwise XOR opportunity is used and shared transmissions are split evenly.
std::pair<double, double> outcome_cost(const TwoUserPlacement& pl,
                                       const DemandOutcome& outcome);

ThroughputPoint expected_throughput(const Instance& inst,
                                    const TwoUserPlacement& pl);

// Column layout of the two-user LP: u, v, w blocks of N columns each, then
// one multicast-pairing variable per support outcome.
struct VariableLayout {
  std::size_t num_items = 0;
  std::size_t num_outcomes = 0;

  std::size_t u(std::size_t n) const { return n; }
  std::size_t v(std::size_t n) const { return num_items + n; }
  std::size_t w(std::size_t n) const { return 2 * num_items + n; }
  std::size_t z(std::size_t o) const { return 3 * num_items + o; }
  std::size_t size() const { return 3 * num_items + num_outcomes; }
};

struct AffineForm {
  std::vector<double> coeffs;
  double constant = 0.0;

  double eval(std::span<const double> x) const;
};

// Each user's expected throughput as an affine function of the LP columns.
// Exact whenever every z column equals its pairing minimum.
struct ThroughputForms {
  VariableLayout layout;
  AffineForm user1, user2;
};

ThroughputForms throughput_forms(const Instance& inst);

// Feasible placements with their pairing variables: per-item box rows, the
// two buffer rows, and two upper bounds per outcome on z. Zero objective.
lp::LinearProgram placement_polytope(const Instance& inst,
                                     const VariableLayout& layout);

struct ScalarizedLp {
  lp::LinearProgram lp;
  // alpha * r1 + (1 - alpha) * r2 == lp objective + constant.
  double constant = 0.0;
  VariableLayout layout;
};

// Requires K == 2 and alpha in [0, 1].
ScalarizedLp build_scalarized_lp(const Instance& inst, double alpha);

TwoUserPlacement placement_from_columns(const VariableLayout& layout,
                                        std::span<const double> x);

struct SweepSample {
  double alpha = 0.0;
  ThroughputPoint point;
  TwoUserPlacement placement;
};

// Vertices ordered by decreasing r1, with the placement achieving each.
struct ThroughputBoundary {
  std::vector<ThroughputPoint> vertices;
  std::vector<TwoUserPlacement> placements;
};

struct BoundarySweep {
  std::vector<SweepSample> samples;  // one per alpha, in input order
  ThroughputBoundary boundary;
};

inline constexpr double kDedupTolerance = 1e-7;

std::vector<double> uniform_alpha_grid(int count);

// Reduces raw sweep samples to the extreme points of their upper-right
// concave hull.
ThroughputBoundary concave_chain(std::span<const SweepSample> samples);

BoundarySweep boundary_sweep(const Instance& inst,
                             std::span<const double> alphas,
                             const lp::SimplexOptions& options = {});

}  // namespace cachegame::twouser
