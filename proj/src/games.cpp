#include "cachegame/games.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cachegame/errors.hpp"

namespace cachegame::games {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_own_cache(std::span<const double> x, std::size_t num_items,
                     double budget) {
  if (x.size() != num_items) {
    throw InvalidPlacement("fixed cache vector has wrong length");
  }
  double sum = 0.0;
  for (double xi : x) {
    if (!(xi >= -twouser::kPlacementTolerance &&
          xi <= 1.0 + twouser::kPlacementTolerance)) {
      throw InvalidPlacement("fixed cache fraction outside [0, 1]");
    }
    sum += xi;
  }
  if (sum > budget + twouser::kPlacementTolerance) {
    throw InvalidPlacement("fixed cache vector overflows its buffer");
  }
}

}  // namespace

PlacementGame::PlacementGame(const Instance& inst, lp::SimplexOptions options)
    : inst_(inst),
      options_(options),
      forms_(twouser::throughput_forms(inst)),
      polytope_(twouser::placement_polytope(inst, forms_.layout)) {}

BestResponse PlacementGame::solve_with(
    std::span<const std::pair<std::size_t, double>> fixed,
    const twouser::AffineForm& objective) const {
  lp::LinearProgram prog = polytope_;
  prog.objective = objective.coeffs;
  const auto reduced = lp::fix_variables(prog, fixed, options_.tolerance);
  const auto sol = lp::solve(reduced.lp, options_);
  if (sol.status != lp::Status::Optimal) {
    throw SolverFailure(std::string("best-response LP is ") +
                        lp::to_string(sol.status));
  }
  const auto x = reduced.expand(sol.x, fixed);
  return {twouser::placement_from_columns(forms_.layout, x), objective.eval(x)};
}

BestResponse PlacementGame::respond(const FixedSide& fixed) const {
  const auto& L = forms_.layout;
  std::vector<std::pair<std::size_t, double>> pinned;
  if (const auto* f = std::get_if<User1Fixed>(&fixed)) {
    check_own_cache(f->u, L.num_items, inst_.buffers()[0]);
    for (std::size_t n = 0; n < L.num_items; ++n) {
      pinned.push_back({L.u(n), f->u[n]});
    }
    return solve_with(pinned, forms_.user2);
  }
  const auto& v = std::get<User2Fixed>(fixed).v;
  check_own_cache(v, L.num_items, inst_.buffers()[1]);
  for (std::size_t n = 0; n < L.num_items; ++n) pinned.push_back({L.v(n), v[n]});
  return solve_with(pinned, forms_.user1);
}

double PlacementGame::shared_optimum(std::span<const double> u,
                                     std::span<const double> v,
                                     int user) const {
  const auto& L = forms_.layout;
  check_own_cache(u, L.num_items, inst_.buffers()[0]);
  check_own_cache(v, L.num_items, inst_.buffers()[1]);
  std::vector<std::pair<std::size_t, double>> pinned;
  for (std::size_t n = 0; n < L.num_items; ++n) {
    pinned.push_back({L.u(n), u[n]});
    pinned.push_back({L.v(n), v[n]});
  }
  return solve_with(pinned, user == 0 ? forms_.user1 : forms_.user2).payoff;
}

BestResponse best_response(const Instance& inst, const FixedSide& fixed) {
  return PlacementGame(inst).respond(fixed);
}

NashResult find_psne(const Instance& inst, int max_iters, double eps,
                     std::uint64_t seed) {
  if (max_iters < 1) throw InputError("max_iters must be >= 1");
  if (!(eps > 0.0)) throw InputError("eps must be > 0");
  const PlacementGame game(inst);
  const std::size_t n_items = inst.num_items();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u(n_items);
  for (double& x : u) x = unit(rng);
  const double total = std::accumulate(u.begin(), u.end(), 0.0);
  const double budget = inst.buffers()[0];
  if (total > budget) {
    for (double& x : u) x *= budget / total;
  }

  NashResult result;
  for (int t = 1; t <= max_iters; ++t) {
    const auto reply2 = game.respond(User1Fixed{u});
    const auto reply1 = game.respond(User2Fixed{reply2.placement.v});
    result.placement = reply2.placement;
    result.iterations = t;
    const double gap = distance(u, reply1.placement.u) +
                       distance(reply2.placement.w, reply1.placement.w);
    if (gap <= eps) {
      result.converged = true;
      break;
    }
    u = reply1.placement.u;
  }
  result.payoffs = twouser::expected_throughput(inst, result.placement);
  return result;
}

PsneReport psne_report(const Instance& inst, const TwoUserPlacement& pl,
                       double tol) {
  const PlacementGame game(inst);
  const auto here = twouser::expected_throughput(inst, pl);
  PsneReport rep;
  rep.gain1 = game.respond(User2Fixed{pl.v}).payoff - here.r1;
  rep.gain2 = game.respond(User1Fixed{pl.u}).payoff - here.r2;
  rep.shared_gap1 = game.shared_optimum(pl.u, pl.v, 0) - here.r1;
  rep.shared_gap2 = game.shared_optimum(pl.u, pl.v, 1) - here.r2;
  rep.ok = rep.gain1 <= tol && rep.gain2 <= tol && rep.shared_gap1 <= tol &&
           rep.shared_gap2 <= tol;
  return rep;
}

double cooperative_total(const Instance& inst) {
  const auto s = twouser::build_scalarized_lp(inst, 0.5);
  const auto sol = lp::solve(s.lp);
  if (sol.status != lp::Status::Optimal) {
    throw SolverFailure(std::string("cooperative LP is ") +
                        lp::to_string(sol.status));
  }
  return 2.0 * (sol.value + s.constant);
}

const char* to_string(AllocationBasis b) {
  return b == AllocationBasis::NashBased ? "nash" : "pure_caching";
}

Allocation split_surplus(double total, ThroughputPoint baseline,
                         AllocationBasis basis) {
  const double half_surplus = 0.5 * (total - baseline.r1 - baseline.r2);
  Allocation a;
  a.r1c = baseline.r1 + half_surplus;
  a.r2c = baseline.r2 + half_surplus;
  a.basis = basis;
  a.total = total;
  a.baseline = baseline;
  return a;
}

AllocationOutcome allocate(const Instance& inst, int max_iters, double eps,
                           std::uint64_t seed) {
  AllocationOutcome out;
  const double total = cooperative_total(inst);
  out.nash = find_psne(inst, max_iters, eps, seed);
  if (out.nash.converged) {
    out.allocation =
        split_surplus(total, out.nash.payoffs, AllocationBasis::NashBased);
  } else {
    const auto& p = inst.preferences();
    const ThroughputPoint pure{
        pure_caching_throughput(p.row(0), inst.buffers()[0]),
        pure_caching_throughput(p.row(1), inst.buffers()[1])};
    out.allocation =
        split_surplus(total, pure, AllocationBasis::PureCachingBased);
  }
  return out;
}

}  // namespace cachegame::games
