#include "cachegame/twouser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cachegame/errors.hpp"

namespace cachegame::twouser {

namespace {

void require_two_users(const Instance& inst) {
  if (inst.num_users() != 2) {
    throw InvalidInstance("two-user routine called with K = " +
                          std::to_string(inst.num_users()));
  }
}

double sum_over(std::span<const double> x, const ItemSet& items) {
  double s = 0.0;
  for (int n : items) s += x[n];
  return s;
}

ItemSet set_difference(const ItemSet& a, const ItemSet& b) {
  ItemSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

ItemSet set_intersection(const ItemSet& a, const ItemSet& b) {
  ItemSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

}  // namespace

void check_box(const TwoUserPlacement& pl) {
  const std::size_t n = pl.u.size();
  if (pl.v.size() != n || pl.w.size() != n) {
    throw InvalidPlacement("u, v, w lengths differ");
  }
  constexpr double tol = kPlacementTolerance;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = pl.u[i], v = pl.v[i], w = pl.w[i];
    if (!(u >= -tol && u <= 1 + tol && v >= -tol && v <= 1 + tol)) {
      throw InvalidPlacement("cached fraction outside [0, 1] at item " +
                             std::to_string(i));
    }
    if (!(w >= -tol && w <= std::min(u, v) + tol)) {
      throw InvalidPlacement("shared fraction exceeds a cache at item " +
                             std::to_string(i));
    }
    if (u + v - w > 1 + tol) {
      throw InvalidPlacement("caches cover more than the item at item " +
                             std::to_string(i));
    }
  }
}

void check_placement(const TwoUserPlacement& pl, const BufferSpec& buffers) {
  check_box(pl);
  if (buffers.num_users() != 2) throw InvalidPlacement("need two buffers");
  const double s1 = std::accumulate(pl.u.begin(), pl.u.end(), 0.0);
  const double s2 = std::accumulate(pl.v.begin(), pl.v.end(), 0.0);
  if (s1 > buffers[0] + kPlacementTolerance ||
      s2 > buffers[1] + kPlacementTolerance) {
    throw InvalidPlacement("placement overflows a buffer");
  }
}

ExclusiveFractions exclusive_fractions(const TwoUserPlacement& pl) {
  check_box(pl);
  const std::size_t n = pl.num_items();
  ExclusiveFractions x{std::vector<double>(n), std::vector<double>(n),
                       std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    x.only1[i] = pl.u[i] - pl.w[i];
    x.only2[i] = pl.v[i] - pl.w[i];
    x.both[i] = pl.w[i];
    x.none[i] = 1.0 - pl.u[i] - pl.v[i] + pl.w[i];
  }
  return x;
}

std::pair<double, double> outcome_cost(const TwoUserPlacement& pl,
                                       const DemandOutcome& outcome) {
  if (outcome.num_users() != 2) {
    throw InvalidPlacement("outcome must list two request sets");
  }
  const auto x = exclusive_fractions(pl);
  const ItemSet& d1 = outcome.requested[0];
  const ItemSet& d2 = outcome.requested[1];
  for (const auto* d : {&d1, &d2}) {
    for (int n : *d) {
      if (n < 0 || static_cast<std::size_t>(n) >= pl.num_items()) {
        throw InvalidPlacement("requested item outside placement");
      }
    }
  }
  const ItemSet common = set_intersection(d1, d2);
  const double shared_uncached = 0.5 * sum_over(x.none, common);
  // Bits user 1 holds that user 2 wants, and vice versa; each matched pair
  // rides in one XOR packet.
  const double held_by_1 = sum_over(x.only1, d2);
  const double held_by_2 = sum_over(x.only2, d1);
  const double pairing = 0.5 * std::min(held_by_1, held_by_2);

  const double c1 = held_by_2 + sum_over(x.none, set_difference(d1, d2)) +
                    shared_uncached - pairing;
  const double c2 = held_by_1 + sum_over(x.none, set_difference(d2, d1)) +
                    shared_uncached - pairing;
  return {c1, c2};
}

ThroughputPoint expected_throughput(const Instance& inst,
                                    const TwoUserPlacement& pl) {
  require_two_users(inst);
  if (pl.num_items() != inst.num_items()) {
    throw InvalidPlacement("placement length differs from num_items");
  }
  check_placement(pl, inst.buffers());
  ThroughputPoint r{inst.expected_requests(0), inst.expected_requests(1)};
  for (const auto& wo : inst.demands()) {
    const auto [c1, c2] = outcome_cost(pl, wo.outcome);
    r.r1 -= wo.prob * c1;
    r.r2 -= wo.prob * c2;
  }
  return r;
}

double AffineForm::eval(std::span<const double> x) const {
  double s = constant;
  for (std::size_t j = 0; j < coeffs.size(); ++j) s += coeffs[j] * x[j];
  return s;
}

ThroughputForms throughput_forms(const Instance& inst) {
  require_two_users(inst);
  ThroughputForms f;
  f.layout = {inst.num_items(), inst.demands().size()};
  const auto& L = f.layout;
  f.user1.coeffs.assign(L.size(), 0.0);
  f.user2.coeffs.assign(L.size(), 0.0);
  f.user1.constant = inst.expected_requests(0);
  f.user2.constant = inst.expected_requests(1);

  // Throughput = expected requests - expected cost; every cost term from
  // outcome_cost is expanded in u, v, w, z with x_none = 1 - u - v + w.
  std::size_t o = 0;
  for (const auto& wo : inst.demands()) {
    const double p = wo.prob;
    const ItemSet& d1 = wo.outcome.requested[0];
    const ItemSet& d2 = wo.outcome.requested[1];
    auto add_cost = [&](AffineForm& form, const ItemSet& mine,
                        const ItemSet& theirs, bool user1) {
      for (int n : mine) {
        // Bits of n held only by the other user.
        const std::size_t other = user1 ? L.v(n) : L.u(n);
        form.coeffs[other] -= p;
        form.coeffs[L.w(n)] += p;
      }
      auto add_none = [&](int n, double share) {
        form.constant -= p * share;
        form.coeffs[L.u(n)] += p * share;
        form.coeffs[L.v(n)] += p * share;
        form.coeffs[L.w(n)] -= p * share;
      };
      for (int n : set_difference(mine, theirs)) add_none(n, 1.0);
      for (int n : set_intersection(mine, theirs)) add_none(n, 0.5);
      form.coeffs[L.z(o)] += 0.5 * p;
    };
    add_cost(f.user1, d1, d2, true);
    add_cost(f.user2, d2, d1, false);
    ++o;
  }
  return f;
}

lp::LinearProgram placement_polytope(const Instance& inst,
                                     const VariableLayout& L) {
  require_two_users(inst);
  lp::LinearProgram prog(L.size());
  for (std::size_t n = 0; n < L.num_items; ++n) {
    prog.add_row({{L.w(n), 1.0}, {L.u(n), -1.0}}, 0.0);
    prog.add_row({{L.w(n), 1.0}, {L.v(n), -1.0}}, 0.0);
    prog.add_row({{L.u(n), 1.0}, {L.v(n), 1.0}, {L.w(n), -1.0}}, 1.0);
  }
  std::vector<std::pair<std::size_t, double>> terms;
  for (std::size_t n = 0; n < L.num_items; ++n) terms.push_back({L.u(n), 1.0});
  prog.add_row(terms, inst.buffers()[0]);
  terms.clear();
  for (std::size_t n = 0; n < L.num_items; ++n) terms.push_back({L.v(n), 1.0});
  prog.add_row(terms, inst.buffers()[1]);

  std::size_t o = 0;
  for (const auto& wo : inst.demands()) {
    const ItemSet& d1 = wo.outcome.requested[0];
    const ItemSet& d2 = wo.outcome.requested[1];
    // z <= sum over D2 of (u - w): user-1-only bits that user 2 wants.
    terms.assign({{L.z(o), 1.0}});
    for (int n : d2) {
      terms.push_back({L.u(n), -1.0});
      terms.push_back({L.w(n), 1.0});
    }
    prog.add_row(terms, 0.0);
    // z <= sum over D1 of (v - w).
    terms.assign({{L.z(o), 1.0}});
    for (int n : d1) {
      terms.push_back({L.v(n), -1.0});
      terms.push_back({L.w(n), 1.0});
    }
    prog.add_row(terms, 0.0);
    ++o;
  }
  return prog;
}

ScalarizedLp build_scalarized_lp(const Instance& inst, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InputError("alpha must lie in [0, 1]");
  }
  const auto forms = throughput_forms(inst);
  ScalarizedLp out;
  out.layout = forms.layout;
  out.lp = placement_polytope(inst, forms.layout);
  for (std::size_t j = 0; j < out.layout.size(); ++j) {
    out.lp.objective[j] =
        alpha * forms.user1.coeffs[j] + (1.0 - alpha) * forms.user2.coeffs[j];
  }
  out.constant =
      alpha * forms.user1.constant + (1.0 - alpha) * forms.user2.constant;
  return out;
}

TwoUserPlacement placement_from_columns(const VariableLayout& L,
                                        std::span<const double> x) {
  auto pl = TwoUserPlacement::empty(L.num_items);
  for (std::size_t n = 0; n < L.num_items; ++n) {
    pl.u[n] = x[L.u(n)];
    pl.v[n] = x[L.v(n)];
    // Basic solutions can carry w a hair above min(u, v) after rounding.
    pl.w[n] = std::min({x[L.w(n)], pl.u[n], pl.v[n]});
  }
  return pl;
}

std::vector<double> uniform_alpha_grid(int count) {
  if (count < 1) throw InputError("alpha grid needs at least one point");
  if (count == 1) return {0.5};
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

ThroughputBoundary concave_chain(std::span<const SweepSample> samples) {
  constexpr double tol = kDedupTolerance;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Ascending r1, descending r2 for equal r1, stable on input order.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = samples[a].point;
    const auto& pb = samples[b].point;
    if (std::abs(pa.r1 - pb.r1) > tol) return pa.r1 < pb.r1;
    return pa.r2 > pb.r2 + tol;
  });

  // Pareto filter with deduplication.
  std::vector<std::size_t> kept;
  for (std::size_t i : idx) {
    const auto& p = samples[i].point;
    bool drop = false;
    for (std::size_t j : idx) {
      if (i == j) continue;
      const auto& q = samples[j].point;
      const bool weakly = q.r1 >= p.r1 - tol && q.r2 >= p.r2 - tol;
      const bool strictly = q.r1 > p.r1 + tol || q.r2 > p.r2 + tol;
      if (weakly && strictly) {
        drop = true;
        break;
      }
    }
    if (drop) continue;
    bool dup = false;
    for (std::size_t j : kept) {
      const auto& q = samples[j].point;
      if (std::abs(q.r1 - p.r1) <= tol && std::abs(q.r2 - p.r2) <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(i);
  }

  // Upper hull, left to right: keep only strict right turns.
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    const auto& po = samples[o].point;
    const auto& pa = samples[a].point;
    const auto& pb = samples[b].point;
    return (pa.r1 - po.r1) * (pb.r2 - po.r2) -
           (pa.r2 - po.r2) * (pb.r1 - po.r1);
  };
  std::vector<std::size_t> hull;
  for (std::size_t i : kept) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], hull.back(), i) >= -1e-10) {
      hull.pop_back();
    }
    hull.push_back(i);
  }

  ThroughputBoundary b;
  for (auto it = hull.rbegin(); it != hull.rend(); ++it) {
    b.vertices.push_back(samples[*it].point);
    b.placements.push_back(samples[*it].placement);
  }
  return b;
}

BoundarySweep boundary_sweep(const Instance& inst,
                             std::span<const double> alphas,
                             const lp::SimplexOptions& options) {
  if (alphas.empty()) throw InputError("empty alpha grid");
  const auto forms = throughput_forms(inst);
  const auto polytope = placement_polytope(inst, forms.layout);

  BoundarySweep sweep;
  sweep.samples.reserve(alphas.size());
  for (double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw InputError("alpha must lie in [0, 1]");
    }
    lp::LinearProgram prog = polytope;
    for (std::size_t j = 0; j < forms.layout.size(); ++j) {
      prog.objective[j] = alpha * forms.user1.coeffs[j] +
                          (1.0 - alpha) * forms.user2.coeffs[j];
    }
    auto sol = lp::solve(prog, options);
    if (sol.status != lp::Status::Optimal) {
      throw SolverFailure(std::string("scalarized LP is ") +
                          lp::to_string(sol.status));
    }
    if (alpha == 0.0 || alpha == 1.0) {
      // Endpoint ties: hold the optimum, then push the other user up.
      const auto& held = alpha == 1.0 ? forms.user1 : forms.user2;
      const auto& other = alpha == 1.0 ? forms.user2 : forms.user1;
      std::vector<std::pair<std::size_t, double>> row;
      for (std::size_t j = 0; j < forms.layout.size(); ++j) {
        if (held.coeffs[j] != 0.0) row.emplace_back(j, -held.coeffs[j]);
      }
      const double slack = 1e-12 * std::max(1.0, std::abs(sol.value));
      prog.add_row(row, -(sol.value - slack));
      prog.objective = other.coeffs;
      const auto second = lp::solve(prog, options);
      if (second.status == lp::Status::Optimal &&
          held.eval(second.x) >= held.eval(sol.x) - 1e-9) {
        sol = second;
      }
    }
    SweepSample s;
    s.alpha = alpha;
    s.point = {forms.user1.eval(sol.x), forms.user2.eval(sol.x)};
    s.placement = placement_from_columns(forms.layout, sol.x);
    sweep.samples.push_back(std::move(s));
  }
  sweep.boundary = concave_chain(sweep.samples);
  return sweep;
}

}  // namespace cachegame::twouser
