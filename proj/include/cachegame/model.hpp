#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cachegame {

// Item indices are zero-based everywhere inside the library. File formats
// and CLI output use one-based ids; the conversion happens in io.cpp.
using ItemSet = std::vector<int>;  // sorted, no duplicates

struct CatalogSpec {
  int num_items = 1;
  // Number of chunks each item is split into by the multiuser engine.
  int chunks_per_item = 1;
};

// Per-user cache capacities in item units. Values above the catalog size are
// clamped; negative values are rejected.
class BufferSpec {
 public:
  BufferSpec() = default;
  BufferSpec(std::vector<double> capacities, int num_items);

  std::size_t num_users() const { return capacities_.size(); }
  double operator[](std::size_t k) const { return capacities_[k]; }
  const std::vector<double>& capacities() const { return capacities_; }

 private:
  std::vector<double> capacities_;
};

// K x N request probabilities. Rows need not sum to one: a user may request
// several items in one delivery phase.
class PreferenceMatrix {
 public:
  PreferenceMatrix() = default;
  PreferenceMatrix(std::size_t num_users, std::size_t num_items,
                   std::vector<double> row_major);
  explicit PreferenceMatrix(const std::vector<std::vector<double>>& rows);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  double operator()(std::size_t k, std::size_t n) const {
    return p_[k * num_items_ + n];
  }
  std::span<const double> row(std::size_t k) const {
    return {p_.data() + k * num_items_, num_items_};
  }
  double row_sum(std::size_t k) const;

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  std::vector<double> p_;
};

// One realization of the demand matrix: requested[k] is the set of items
// user k asks for.
struct DemandOutcome {
  std::vector<ItemSet> requested;

  std::size_t num_users() const { return requested.size(); }
  bool operator==(const DemandOutcome&) const = default;
  auto operator<=>(const DemandOutcome&) const = default;
};

struct WeightedOutcome {
  DemandOutcome outcome;
  double prob = 0.0;
};

// Finite-support probability measure over demand outcomes.
class DemandDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  DemandDistribution() = default;
  // Validates: nonnegative probabilities summing to one, canonical item sets,
  // pairwise-distinct outcomes.
  explicit DemandDistribution(std::vector<WeightedOutcome> support);

  const std::vector<WeightedOutcome>& support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  auto begin() const { return support_.begin(); }
  auto end() const { return support_.end(); }

  // P(item n is in user k's request set).
  double marginal(std::size_t k, int n) const;

 private:
  std::vector<WeightedOutcome> support_;
};

class Instance {
 public:
  static constexpr double kMarginalTolerance = 1e-9;

  // Throws InvalidInstance on inconsistent dimensions or when the demand
  // marginals disagree with the preference matrix.
  Instance(CatalogSpec catalog, BufferSpec buffers,
           PreferenceMatrix preferences, DemandDistribution demands);

  const CatalogSpec& catalog() const { return catalog_; }
  const BufferSpec& buffers() const { return buffers_; }
  const PreferenceMatrix& preferences() const { return preferences_; }
  const DemandDistribution& demands() const { return demands_; }

  std::size_t num_users() const { return preferences_.num_users(); }
  std::size_t num_items() const { return preferences_.num_items(); }

  // Expected number of items requested by user k.
  double expected_requests(std::size_t k) const {
    return preferences_.row_sum(k);
  }

 private:
  CatalogSpec catalog_;
  BufferSpec buffers_;
  PreferenceMatrix preferences_;
  DemandDistribution demands_;
};

// Each user independently requests exactly one item drawn from its row.
// Zero-probability outcomes are left out of the support.
DemandDistribution independent_single_demand(const PreferenceMatrix& p);

std::vector<double> zipf_row(int num_items, double exponent);

// Row 1 interpolates between uniform and a point mass on item 1; row 2 is
// uniform. Four items.
PreferenceMatrix beta_mixture_matrix(double beta);

// Throughput of a user who caches its most-requested items and gets no help
// from multicast: top-floor(c) mass plus the fractional part of the next item.
double pure_caching_throughput(std::span<const double> p_row, double capacity);

// Items ordered by decreasing probability, ties broken by lower index.
std::vector<int> popularity_order(std::span<const double> p_row);

// Convenience: instance with independent single requests.
Instance make_single_request_instance(const PreferenceMatrix& p,
                                      std::vector<double> buffers,
                                      int chunks_per_item = 1);

}  // namespace cachegame
