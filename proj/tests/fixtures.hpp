#pragma once

#include <random>
#include <vector>

#include "cachegame/model.hpp"

namespace fixtures {

using cachegame::Instance;
using cachegame::PreferenceMatrix;

inline PreferenceMatrix skewed_prefs() {
  return PreferenceMatrix({{0.99, 0.01}, {0.5, 0.5}});
}

inline Instance skewed(double b1 = 1.0, double b2 = 1.0) {
  return cachegame::make_single_request_instance(skewed_prefs(), {b1, b2});
}

// which = 1: Zipf/Zipf, 2: uniform/Zipf, 3: uniform/uniform. N = 20.
inline PreferenceMatrix domain_prefs(int which) {
  const auto zipf = cachegame::zipf_row(20, 1.0);
  const auto unif = cachegame::zipf_row(20, 0.0);
  switch (which) {
    case 1: return PreferenceMatrix({zipf, zipf});
    case 2: return PreferenceMatrix({unif, zipf});
    default: return PreferenceMatrix({unif, unif});
  }
}

inline Instance domain_instance(int which, double b = 1.0) {
  return cachegame::make_single_request_instance(domain_prefs(which), {b, b});
}

inline PreferenceMatrix p4() {
  return PreferenceMatrix({{0.7, 0.2, 0.1, 0.0},
                           {0.4, 0.3, 0.2, 0.1},
                           {0.25, 0.25, 0.25, 0.25}});
}

// Random probability row with occasional exact zeros.
inline std::vector<double> random_row(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution zero(0.15);
  std::vector<double> row(n);
  double sum = 0.0;
  for (auto& x : row) {
    x = zero(rng) ? 0.0 : expo(rng);
    sum += x;
  }
  if (sum == 0.0) {
    row[0] = 1.0;
    sum = 1.0;
  }
  for (auto& x : row) x /= sum;
  return row;
}

// Two users, 2 <= N <= max_items, single requests, buffers uniform on [0, N].
inline Instance random_two_user(std::mt19937_64& rng, int max_items = 6) {
  const int n = std::uniform_int_distribution<int>(2, max_items)(rng);
  std::uniform_real_distribution<double> cap(0.0, n);
  PreferenceMatrix p({random_row(rng, n), random_row(rng, n)});
  const double b1 = cap(rng);
  const double b2 = cap(rng);
  return cachegame::make_single_request_instance(p, {b1, b2});
}

// Multiuser instance with chunk-aligned buffers: K <= max_users,
// N <= max_items, G <= max_chunks.
inline Instance random_multiuser(std::mt19937_64& rng, int max_users = 4,
                                 int max_items = 6, int max_chunks = 4) {
  const int k = std::uniform_int_distribution<int>(1, max_users)(rng);
  const int n = std::uniform_int_distribution<int>(1, max_items)(rng);
  const int g = std::uniform_int_distribution<int>(1, max_chunks)(rng);
  std::vector<std::vector<double>> rows;
  std::vector<double> buffers;
  std::uniform_int_distribution<int> units(0, n * g);
  for (int u = 0; u < k; ++u) {
    rows.push_back(random_row(rng, n));
    buffers.push_back(static_cast<double>(units(rng)) / g);
  }
  return cachegame::make_single_request_instance(PreferenceMatrix(rows),
                                                 buffers, g);
}

}  // namespace fixtures
