#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cachegame::lp {

// maximize  c^T x
// s.t.      A x <= h,  x >= 0
//
// Equality constraints are expressed by the caller as two inequalities.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;  // length num_vars
  std::vector<double> matrix;     // row-major, num_rows x num_vars
  std::vector<double> rhs;        // length num_rows

  LinearProgram() = default;
  explicit LinearProgram(std::size_t n) : num_vars(n), objective(n, 0.0) {}

  std::size_t num_rows() const { return rhs.size(); }
  double coef(std::size_t row, std::size_t col) const {
    return matrix[row * num_vars + col];
  }

  // Appends a row given as (column, coefficient) pairs; repeated columns add.
  void add_row(std::span<const std::pair<std::size_t, double>> terms,
               double bound);
  void add_row(std::initializer_list<std::pair<std::size_t, double>> terms,
               double bound) {
    add_row(std::span(terms.begin(), terms.size()), bound);
  }
  void add_dense_row(std::span<const double> coeffs, double bound);

  // Throws std::invalid_argument on shape mismatch.
  void check_shape() const;
};

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double value = 0.0;
  // Row prices. Nonnegative and A^T y >= c within tolerance at optimality,
  // with h^T y == value.
  std::vector<double> duals;
  // Basic columns at termination, sorted. Columns [0, num_vars) are
  // structural, [num_vars, num_vars + num_rows) are slacks.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
};

enum class PivotRule {
  // Smallest-index entering and leaving variable throughout.
  Bland,
  // Steepest reduced cost until the first degenerate pivot, Bland's rule
  // from then on.
  DantzigBlandFallback,
};

struct SimplexOptions {
  double tolerance = 1e-9;
  PivotRule rule = PivotRule::Bland;
};

// Two-phase dense primal simplex. Deterministic. Ratio tests use a tiny
// fixed lift of h to break degenerate ties; the final basis is then repaired
// against the exact h with dual simplex pivots. Returns a basic feasible
// solution when optimal. Infeasible and unbounded problems are reported via
// status; throws NumericalFailure when the pivot count exceeds
// 10 * (num_rows + num_vars)^2.
Solution solve(const LinearProgram& lp, const SimplexOptions& options = {});

// Substitutes fixed values for a subset of variables. The reduced program
// ranges over the remaining variables in their original order.
struct FixedProgram {
  LinearProgram lp;
  std::vector<std::size_t> free_vars;  // reduced index -> original index
  double objective_offset = 0.0;       // c_fixed^T x_fixed

  // Scatters a reduced solution back into a full-length vector.
  std::vector<double> expand(std::span<const double> reduced_x,
                             std::span<const std::pair<std::size_t, double>>
                                 fixed) const;
};

FixedProgram fix_variables(
    const LinearProgram& lp,
    std::span<const std::pair<std::size_t, double>> fixed,
    double tolerance = 1e-9);

}  // namespace cachegame::lp
