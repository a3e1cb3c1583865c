#include "cachegame/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "cachegame/errors.hpp"

namespace cachegame {

namespace {

constexpr std::size_t kMaxSupport = 1'000'000;

bool is_canonical_set(const ItemSet& s, int num_items) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= num_items) return false;
    if (i > 0 && s[i] <= s[i - 1]) return false;
  }
  return true;
}

}  // namespace

BufferSpec::BufferSpec(std::vector<double> capacities, int num_items)
    : capacities_(std::move(capacities)) {
  if (capacities_.empty()) throw InvalidInstance("no buffers given");
  for (double& b : capacities_) {
    if (!std::isfinite(b) || b < 0.0) {
      throw InvalidInstance("buffer capacity must be finite and >= 0");
    }
    b = std::min(b, static_cast<double>(num_items));
  }
}

PreferenceMatrix::PreferenceMatrix(std::size_t num_users,
                                   std::size_t num_items,
                                   std::vector<double> row_major)
    : num_users_(num_users), num_items_(num_items), p_(std::move(row_major)) {
  if (num_users_ == 0 || num_items_ == 0) {
    throw InvalidInstance("preference matrix must be at least 1x1");
  }
  if (p_.size() != num_users_ * num_items_) {
    throw InvalidInstance("preference matrix has wrong number of entries");
  }
  for (double x : p_) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidInstance("preference entries must lie in [0, 1]");
    }
  }
}

PreferenceMatrix::PreferenceMatrix(const std::vector<std::vector<double>>& rows)
    : PreferenceMatrix(
          rows.size(), rows.empty() ? 0 : rows.front().size(), [&] {
            std::vector<double> flat;
            for (const auto& r : rows) {
              if (r.size() != rows.front().size()) {
                throw InvalidInstance("ragged preference matrix");
              }
              flat.insert(flat.end(), r.begin(), r.end());
            }
            return flat;
          }()) {}

double PreferenceMatrix::row_sum(std::size_t k) const {
  auto r = row(k);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

DemandDistribution::DemandDistribution(std::vector<WeightedOutcome> support)
    : support_(std::move(support)) {
  if (support_.empty()) throw InvalidInstance("empty demand support");
  const std::size_t k = support_.front().outcome.num_users();
  double total = 0.0;
  std::set<DemandOutcome> seen;
  for (const auto& wo : support_) {
    if (wo.outcome.num_users() != k) {
      throw InvalidInstance("demand outcomes disagree on number of users");
    }
    if (!(wo.prob >= 0.0) || !std::isfinite(wo.prob)) {
      throw InvalidInstance("demand probabilities must be >= 0");
    }
    for (const auto& s : wo.outcome.requested) {
      if (!is_canonical_set(s, std::numeric_limits<int>::max())) {
        throw InvalidInstance("request sets must be sorted and duplicate-free");
      }
    }
    if (!seen.insert(wo.outcome).second) {
      throw InvalidInstance("duplicate outcome in demand support");
    }
    total += wo.prob;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvalidInstance("demand probabilities sum to " +
                          std::to_string(total));
  }
}

double DemandDistribution::marginal(std::size_t k, int n) const {
  double m = 0.0;
  for (const auto& wo : support_) {
    const auto& s = wo.outcome.requested[k];
    if (std::binary_search(s.begin(), s.end(), n)) m += wo.prob;
  }
  return m;
}

Instance::Instance(CatalogSpec catalog, BufferSpec buffers,
                   PreferenceMatrix preferences, DemandDistribution demands)
    : catalog_(catalog),
      buffers_(std::move(buffers)),
      preferences_(std::move(preferences)),
      demands_(std::move(demands)) {
  if (catalog_.num_items < 1 || catalog_.chunks_per_item < 1) {
    throw InvalidInstance("num_items and chunks_per_item must be >= 1");
  }
  const auto n_items = static_cast<std::size_t>(catalog_.num_items);
  const std::size_t k_users = preferences_.num_users();
  if (preferences_.num_items() != n_items) {
    throw InvalidInstance("preference matrix width differs from num_items");
  }
  if (buffers_.num_users() != k_users) {
    throw InvalidInstance("buffer count differs from number of users");
  }
  for (const auto& wo : demands_) {
    if (wo.outcome.num_users() != k_users) {
      throw InvalidInstance("demand outcome has wrong number of users");
    }
    for (const auto& s : wo.outcome.requested) {
      if (!is_canonical_set(s, catalog_.num_items)) {
        throw InvalidInstance("requested item out of range");
      }
    }
  }
  for (std::size_t k = 0; k < k_users; ++k) {
    for (std::size_t n = 0; n < n_items; ++n) {
      const double m = demands_.marginal(k, static_cast<int>(n));
      if (std::abs(m - preferences_(k, n)) > kMarginalTolerance) {
        throw InvalidInstance("demand marginal for user " + std::to_string(k) +
                              ", item " + std::to_string(n) +
                              " does not match preference matrix");
      }
    }
  }
}

DemandDistribution independent_single_demand(const PreferenceMatrix& p) {
  const std::size_t k_users = p.num_users();
  const std::size_t n_items = p.num_items();
  for (std::size_t k = 0; k < k_users; ++k) {
    if (std::abs(p.row_sum(k) - 1.0) > 1e-9) {
      throw RowNotStochastic("row " + std::to_string(k) + " sums to " +
                             std::to_string(p.row_sum(k)));
    }
  }
  double full = 1.0;
  for (std::size_t k = 0; k < k_users; ++k) full *= static_cast<double>(n_items);
  if (full > static_cast<double>(kMaxSupport)) {
    throw SupportTooLarge("N^K exceeds " + std::to_string(kMaxSupport));
  }

  // Rows within 1e-9 of stochastic are renormalized so the support sums to
  // one at the tighter distribution tolerance.
  std::vector<double> inv_sum(k_users);
  for (std::size_t k = 0; k < k_users; ++k) inv_sum[k] = 1.0 / p.row_sum(k);

  // Odometer over (n_1, ..., n_K), last user varying fastest.
  std::vector<WeightedOutcome> support;
  std::vector<std::size_t> pick(k_users, 0);
  while (true) {
    double prob = 1.0;
    for (std::size_t k = 0; k < k_users; ++k) {
      prob *= p(k, pick[k]) * inv_sum[k];
    }
    if (prob > 0.0) {
      DemandOutcome o;
      o.requested.reserve(k_users);
      for (std::size_t k = 0; k < k_users; ++k) {
        o.requested.push_back({static_cast<int>(pick[k])});
      }
      support.push_back({std::move(o), prob});
    }
    std::size_t k = k_users;
    while (k > 0) {
      --k;
      if (++pick[k] < n_items) break;
      pick[k] = 0;
      if (k == 0) return DemandDistribution(std::move(support));
    }
  }
}

std::vector<double> zipf_row(int num_items, double exponent) {
  if (num_items < 1 || exponent < 0.0) {
    throw InputError("zipf_row needs num_items >= 1 and exponent >= 0");
  }
  std::vector<double> row(static_cast<std::size_t>(num_items));
  double total = 0.0;
  for (int i = 0; i < num_items; ++i) {
    row[i] = std::pow(static_cast<double>(i + 1), -exponent);
    total += row[i];
  }
  for (double& x : row) x /= total;
  return row;
}

PreferenceMatrix beta_mixture_matrix(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw BetaOutOfRange("beta must lie in [0, 1]");
  }
  const double rest = 0.25 * (1.0 - beta);
  return PreferenceMatrix({{0.25 + 0.75 * beta, rest, rest, rest},
                           {0.25, 0.25, 0.25, 0.25}});
}

std::vector<int> popularity_order(std::span<const double> p_row) {
  std::vector<int> order(p_row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p_row[a] > p_row[b]; });
  return order;
}

double pure_caching_throughput(std::span<const double> p_row, double capacity) {
  const auto n_items = static_cast<double>(p_row.size());
  if (!(capacity >= 0.0 && capacity <= n_items)) {
    throw CapacityOutOfRange("capacity must lie in [0, N]");
  }
  const auto order = popularity_order(p_row);
  const auto whole = static_cast<std::size_t>(std::floor(capacity));
  double r = 0.0;
  for (std::size_t i = 0; i < whole; ++i) r += p_row[order[i]];
  const double frac = capacity - static_cast<double>(whole);
  if (frac > 0.0) r += frac * p_row[order[whole]];
  return r;
}

Instance make_single_request_instance(const PreferenceMatrix& p,
                                      std::vector<double> buffers,
                                      int chunks_per_item) {
  const int n = static_cast<int>(p.num_items());
  return Instance(CatalogSpec{n, chunks_per_item},
                  BufferSpec(std::move(buffers), n), p,
                  independent_single_demand(p));
}

}  // namespace cachegame
