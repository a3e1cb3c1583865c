#include "cachegame/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <tuple>

#include "cachegame/errors.hpp"

namespace cachegame::oracle {

namespace {

// Solves the square system M x = r in place; false when singular.
bool solve_square(std::vector<double>& m, std::vector<double>& r,
                  std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::abs(m[i * n + col]) > std::abs(m[piv * n + col])) piv = i;
    }
    if (std::abs(m[piv * n + col]) < 1e-10) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[col * n + j], m[piv * n + j]);
      std::swap(r[col], r[piv]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m[i * n + col] / m[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) m[i * n + j] -= f * m[col * n + j];
      r[i] -= f * r[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) r[i] /= m[i * n + i];
  return true;
}

// Constraint k of the stacked system [A; -I] x <= [h; 0].
double stacked_coef(const lp::LinearProgram& prog, std::size_t k,
                    std::size_t j) {
  if (k < prog.num_rows()) return prog.coef(k, j);
  return (k - prog.num_rows() == j) ? -1.0 : 0.0;
}

double stacked_rhs(const lp::LinearProgram& prog, std::size_t k) {
  return k < prog.num_rows() ? prog.rhs[k] : 0.0;
}

// Calls visit(active) for every increasing k-subset of [0, total).
template <class Visit>
void for_each_subset(std::size_t total, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  if (k > total) return;
  while (true) {
    visit(pick);
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == total - k + i - 1) --i;
    if (i == 0) return;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

bool feasible(const lp::LinearProgram& prog, const std::vector<double>& x,
              double tol) {
  for (double xi : x) {
    if (xi < -tol) return false;
  }
  for (std::size_t i = 0; i < prog.num_rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < prog.num_vars; ++j) s += prog.coef(i, j) * x[j];
    if (s > prog.rhs[i] + tol) return false;
  }
  return true;
}

using ChunkSet = std::set<std::pair<int, int>>;

ChunkSet minus(const ChunkSet& a, const ChunkSet& b) {
  ChunkSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

ChunkSet meet(const ChunkSet& a, const ChunkSet& b) {
  ChunkSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

int grid_units(double fraction, int resolution) {
  const double scaled = fraction * resolution;
  const double r = std::round(scaled);
  if (std::abs(scaled - r) > 1e-9) {
    throw MisalignedPlacement("fraction " + std::to_string(fraction) +
                              " is not a multiple of 1/" +
                              std::to_string(resolution));
  }
  return static_cast<int>(r);
}

// (a, b, c) = (u, v, w) in grid units with c <= min(a, b), a + b - c <= R.
std::vector<std::tuple<int, int, int>> item_triples(int resolution) {
  std::vector<std::tuple<int, int, int>> out;
  for (int a = 0; a <= resolution; ++a) {
    for (int b = 0; b <= resolution; ++b) {
      for (int c = 0; c <= std::min(a, b); ++c) {
        if (a + b - c <= resolution) out.emplace_back(a, b, c);
      }
    }
  }
  return out;
}

}  // namespace

lp::Solution lp_vertex_enumerate(const lp::LinearProgram& prog,
                                 double tolerance) {
  prog.check_shape();
  const std::size_t n = prog.num_vars;
  const std::size_t m = prog.num_rows();
  if (n > kMaxEnumVars || m > kMaxEnumRows) {
    throw TooLarge("vertex enumeration limited to " +
                   std::to_string(kMaxEnumVars) + " vars and " +
                   std::to_string(kMaxEnumRows) + " rows");
  }
  lp::Solution best;
  best.status = lp::Status::Infeasible;
  best.value = -std::numeric_limits<double>::infinity();
  if (n == 0) {
    best.status = lp::Status::Optimal;
    for (double h : prog.rhs) {
      if (h < -tolerance) best.status = lp::Status::Infeasible;
    }
    best.value = 0.0;
    return best;
  }

  std::vector<double> sys(n * n), rhs(n);
  for_each_subset(m + n, n, [&](const std::vector<std::size_t>& active) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        sys[r * n + j] = stacked_coef(prog, active[r], j);
      }
      rhs[r] = stacked_rhs(prog, active[r]);
    }
    if (!solve_square(sys, rhs, n)) return;
    if (!feasible(prog, rhs, tolerance)) return;
    double value = 0.0;
    for (std::size_t j = 0; j < n; ++j) value += prog.objective[j] * rhs[j];
    if (value > best.value + 1e-12) {
      best.status = lp::Status::Optimal;
      best.value = value;
      best.x = rhs;
    }
  });
  if (best.status == lp::Status::Infeasible) {
    best.value = 0.0;
    return best;
  }

  // Extreme rays: vertices of {d >= 0, A d <= 0, sum d = 1}. The last row of
  // each square system is the normalization.
  bool unbounded = false;
  for_each_subset(m + n, n - 1, [&](const std::vector<std::size_t>& active) {
    if (unbounded) return;
    for (std::size_t r = 0; r + 1 < n; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        sys[r * n + j] = stacked_coef(prog, active[r], j);
      }
      rhs[r] = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) sys[(n - 1) * n + j] = 1.0;
    rhs[n - 1] = 1.0;
    if (!solve_square(sys, rhs, n)) return;
    for (std::size_t k = 0; k < m + n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += stacked_coef(prog, k, j) * rhs[j];
      if (s > tolerance) return;
    }
    double gain = 0.0;
    for (std::size_t j = 0; j < n; ++j) gain += prog.objective[j] * rhs[j];
    if (gain > tolerance) unbounded = true;
  });
  if (unbounded) {
    lp::Solution s;
    s.status = lp::Status::Unbounded;
    return s;
  }
  return best;
}

double grid_best_sum(const Instance& inst, GridSpec grid) {
  if (inst.num_users() != 2) throw InvalidInstance("grid search needs K = 2");
  if (grid.resolution < 1) throw InputError("grid resolution must be >= 1");
  const auto triples = item_triples(grid.resolution);
  const std::size_t n_items = inst.num_items();
  const double points = std::pow(static_cast<double>(triples.size()),
                                 static_cast<double>(n_items));
  if (points >= kMaxGridPoints) {
    throw TooLarge("grid has " + std::to_string(points) + " points");
  }
  const double res = grid.resolution;
  const double cap1 = inst.buffers()[0] * res + 1e-9;
  const double cap2 = inst.buffers()[1] * res + 1e-9;

  auto pl = twouser::TwoUserPlacement::empty(n_items);
  double best = -std::numeric_limits<double>::infinity();
  auto recurse = [&](auto&& self, std::size_t item, int used1,
                     int used2) -> void {
    if (item == n_items) {
      const auto r = twouser::expected_throughput(inst, pl);
      best = std::max(best, r.r1 + r.r2);
      return;
    }
    for (const auto& [a, b, c] : triples) {
      if (used1 + a > cap1 || used2 + b > cap2) continue;
      pl.u[item] = a / res;
      pl.v[item] = b / res;
      pl.w[item] = c / res;
      self(self, item + 1, used1 + a, used2 + b);
    }
  };
  recurse(recurse, 0, 0, 0);
  return best;
}

std::pair<double, double> bit_level_two_user_cost(
    const twouser::TwoUserPlacement& pl, const DemandOutcome& outcome,
    int chunks_per_item) {
  const int g = chunks_per_item;
  if (g < 1) throw InputError("chunks_per_item must be >= 1");
  if (outcome.num_users() != 2) throw InvalidPlacement("need two users");
  twouser::check_box(pl);

  // User 1 holds chunks [0, a); user 2 holds the shared prefix [0, c) and
  // then [a, a + b - c).
  ChunkSet c1, c2;
  for (std::size_t n = 0; n < pl.num_items(); ++n) {
    const int a = grid_units(pl.u[n], g);
    const int b = grid_units(pl.v[n], g);
    const int c = grid_units(pl.w[n], g);
    const int item = static_cast<int>(n);
    for (int j = 0; j < a; ++j) c1.insert({item, j});
    for (int j = 0; j < c; ++j) c2.insert({item, j});
    for (int j = a; j < a + b - c; ++j) c2.insert({item, j});
  }
  auto wanted = [&](const ItemSet& items) {
    ChunkSet q;
    for (int n : items) {
      for (int j = 0; j < g; ++j) q.insert({n, j});
    }
    return q;
  };
  const ChunkSet missing1 = minus(wanted(outcome.requested[0]), c1);
  const ChunkSet missing2 = minus(wanted(outcome.requested[1]), c2);
  const ChunkSet y1 = minus(missing1, missing2);
  const ChunkSet y2 = minus(missing2, missing1);
  const ChunkSet y12 = meet(missing1, missing2);
  const ChunkSet only1 = minus(c1, c2);
  const ChunkSet only2 = minus(c2, c1);
  const ChunkSet give_to_2 = meet(only1, y2);  // held by 1, wanted by 2
  const ChunkSet give_to_1 = meet(only2, y1);

  // Messages as lists of XOR terms.
  using Packet = std::vector<std::pair<int, int>>;
  std::vector<Packet> to1, to2, to_both;
  const std::size_t pairs = std::min(give_to_1.size(), give_to_2.size());
  auto it1 = give_to_1.begin();
  auto it2 = give_to_2.begin();
  ChunkSet paired;
  for (std::size_t i = 0; i < pairs; ++i, ++it1, ++it2) {
    to_both.push_back({*it1, *it2});
    paired.insert(*it1);
    paired.insert(*it2);
  }
  for (const auto& c : y12) to_both.push_back({c});
  for (const auto& c : minus(y1, paired)) to1.push_back({c});
  for (const auto& c : minus(y2, paired)) to2.push_back({c});

  auto check_decodes = [](ChunkSet known, const ChunkSet& need,
                          const std::vector<const std::vector<Packet>*>& in) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto* msgs : in) {
        for (const auto& pkt : *msgs) {
          int unknown = 0;
          std::pair<int, int> last;
          for (const auto& t : pkt) {
            if (!known.contains(t)) {
              ++unknown;
              last = t;
            }
          }
          if (unknown == 1) {
            known.insert(last);
            progress = true;
          }
        }
      }
    }
    for (const auto& c : need) {
      if (!known.contains(c)) {
        throw DecodingFailure("bit-level delivery left a chunk unresolved");
      }
    }
  };
  check_decodes(c1, missing1, {&to1, &to_both});
  check_decodes(c2, missing2, {&to2, &to_both});

  const double gd = g;
  return {(static_cast<double>(to1.size()) + 0.5 * to_both.size()) / gd,
          (static_cast<double>(to2.size()) + 0.5 * to_both.size()) / gd};
}

twouser::TwoUserPlacement sample_aligned_placement(std::size_t num_items,
                                                   int resolution,
                                                   std::mt19937_64& rng) {
  const auto triples = item_triples(resolution);
  std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
  auto pl = twouser::TwoUserPlacement::empty(num_items);
  const double res = resolution;
  for (std::size_t n = 0; n < num_items; ++n) {
    const auto& [a, b, c] = triples[pick(rng)];
    pl.u[n] = a / res;
    pl.v[n] = b / res;
    pl.w[n] = c / res;
  }
  return pl;
}

}  // namespace cachegame::oracle
