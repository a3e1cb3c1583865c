#include "cachegame/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cachegame/errors.hpp"

namespace cachegame::lp {

void LinearProgram::add_row(
    std::span<const std::pair<std::size_t, double>> terms, double bound) {
  const std::size_t base = matrix.size();
  matrix.resize(base + num_vars, 0.0);
  for (const auto& [col, value] : terms) {
    if (col >= num_vars) throw std::invalid_argument("column out of range");
    matrix[base + col] += value;
  }
  rhs.push_back(bound);
}

void LinearProgram::add_dense_row(std::span<const double> coeffs,
                                  double bound) {
  if (coeffs.size() != num_vars) {
    throw std::invalid_argument("row length differs from num_vars");
  }
  matrix.insert(matrix.end(), coeffs.begin(), coeffs.end());
  rhs.push_back(bound);
}

void LinearProgram::check_shape() const {
  if (objective.size() != num_vars) {
    throw std::invalid_argument("objective length differs from num_vars");
  }
  if (matrix.size() != rhs.size() * num_vars) {
    throw std::invalid_argument("matrix shape differs from rhs length");
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

constexpr double kDropTolerance = 1e-14;
constexpr double kPerturbation = 1e-7;

enum class PhaseResult { Optimal, Unbounded };

// Dense tableau over [structural | slack | artificial] columns. Rows that
// phase one proves redundant are deactivated rather than erased so row
// indices keep matching the caller's constraints.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt)
      : opt_(opt),
        n_(lp.num_vars),
        m_(lp.num_rows()),
        b_(lp.rhs),
        basis_(m_),
        row_active_(m_, 1) {
    std::vector<std::size_t> art_rows;
    for (std::size_t i = 0; i < m_; ++i) {
      if (b_[i] < 0.0) art_rows.push_back(i);
    }
    n_art_ = art_rows.size();
    cols_ = n_ + m_ + n_art_;
    t_.assign(m_ * cols_, 0.0);
    allowed_.assign(cols_, 1);
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = &t_[i * cols_];
      for (std::size_t j = 0; j < n_; ++j) row[j] = lp.coef(i, j);
      row[n_ + i] = 1.0;
      basis_[i] = n_ + i;
    }
    for (std::size_t a = 0; a < n_art_; ++a) {
      const std::size_t i = art_rows[a];
      double* row = &t_[i * cols_];
      for (std::size_t j = 0; j < n_ + m_; ++j) row[j] = -row[j];
      b_[i] = -b_[i];
      row[n_ + m_ + a] = 1.0;
      basis_[i] = n_ + m_ + a;
    }
    max_iters_ = 10 * (m_ + n_) * (m_ + n_) + 10;
    // Ratio tests run on a slightly lifted right-hand side so that ties at
    // zero are rare; the true one rides along and is restored at the end.
    b0_ = b_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double frac = std::fmod(0.6180339887498949 * (i + 1), 1.0);
      b_[i] += kPerturbation * (1.0 + frac) * std::max(1.0, std::abs(b_[i]));
    }
  }

  bool needs_phase_one() const { return n_art_ > 0; }

  // Returns false when the constraints admit no solution.
  bool phase_one() {
    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = n_ + m_; j < cols_; ++j) cost[j] = -1.0;
    run(cost);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (row_active_[i] && basis_[i] >= n_ + m_) infeas += b0_[i];
    }
    double scale = 1.0;
    for (double h : b0_) scale = std::max(scale, std::abs(h));
    if (infeas > opt_.tolerance * scale) return false;

    // Drive zero-level artificials out of the basis.
    for (std::size_t i = 0; i < m_; ++i) {
      if (!row_active_[i] || basis_[i] < n_ + m_) continue;
      const double* row = &t_[i * cols_];
      std::size_t best = cols_;
      double best_abs = opt_.tolerance;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (std::abs(row[j]) > best_abs) {
          best_abs = std::abs(row[j]);
          best = j;
        }
      }
      if (best == cols_) {
        row_active_[i] = 0;
      } else {
        pivot(i, best);
      }
    }
    for (std::size_t j = n_ + m_; j < cols_; ++j) allowed_[j] = 0;
    return true;
  }

  PhaseResult phase_two(const std::vector<double>& objective) {
    std::vector<double> cost(cols_, 0.0);
    std::copy(objective.begin(), objective.end(), cost.begin());
    return run(cost);
  }

  // Swaps the true right-hand side back in and repairs any primal
  // infeasibility with dual simplex pivots; the reduced costs stay optimal.
  // Returns false if no repair exists.
  bool restore() {
    b_ = b0_;
    while (true) {
      std::size_t r = m_;
      double worst = -opt_.tolerance;
      for (std::size_t i = 0; i < m_; ++i) {
        if (row_active_[i] && b_[i] < worst) {
          worst = b_[i];
          r = i;
        }
      }
      if (r == m_) break;
      const double* row = &t_[r * cols_];
      std::size_t q = cols_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allowed_[j] || row[j] >= -opt_.tolerance) continue;
        const double ratio = std::min(0.0, d_[j]) / row[j];
        if (ratio < best - 1e-12) {
          best = ratio;
          q = j;
        }
      }
      if (q == cols_) return false;
      pivot(r, q);
      if (++iterations_ > max_iters_) {
        throw NumericalFailure("simplex exceeded " +
                               std::to_string(max_iters_) + " pivots");
      }
    }
    for (double& v : b_) v = std::max(v, 0.0);
    return true;
  }

  Solution extract(const LinearProgram& lp) const {
    Solution s;
    s.status = Status::Optimal;
    s.iterations = iterations_;
    s.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!row_active_[i]) continue;
      if (basis_[i] < n_) s.x[basis_[i]] = std::max(0.0, b_[i]);
      if (basis_[i] < n_ + m_) s.basis.push_back(basis_[i]);
    }
    std::sort(s.basis.begin(), s.basis.end());
    for (std::size_t j = 0; j < n_; ++j) s.value += lp.objective[j] * s.x[j];
    s.duals.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) s.duals[i] = -d_[n_ + i];
    return s;
  }

 private:
  PhaseResult run(const std::vector<double>& cost) {
    d_ = cost;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!row_active_[i]) continue;
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &t_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (row_active_[i]) d_[basis_[i]] = 0.0;
    }

    bool bland = opt_.rule == PivotRule::Bland;
    while (true) {
      const std::size_t q = choose_entering(bland);
      if (q == cols_) return PhaseResult::Optimal;
      const std::size_t r = choose_leaving(q);
      if (r == m_) return PhaseResult::Unbounded;
      const double step = b_[r] / t_[r * cols_ + q];
      pivot(r, q);
      // Once a degenerate pivot shows up, stay with Bland for the phase.
      if (step <= opt_.tolerance) bland = true;
      if (++iterations_ > max_iters_) {
        throw NumericalFailure("simplex exceeded " +
                               std::to_string(max_iters_) + " pivots");
      }
    }
  }

  std::size_t choose_entering(bool bland) const {
    std::size_t q = cols_;
    double best = opt_.tolerance;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!allowed_[j] || d_[j] <= opt_.tolerance) continue;
      if (bland) return j;
      if (d_[j] > best) {
        best = d_[j];
        q = j;
      }
    }
    return q;
  }

  std::size_t choose_leaving(std::size_t q) const {
    std::size_t r = m_;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      if (!row_active_[i]) continue;
      const double a = t_[i * cols_ + q];
      if (a <= opt_.tolerance) continue;
      const double ratio = b_[i] / a;
      if (r == m_ || ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        r = i;
      } else if (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[r]) {
        best_ratio = std::min(best_ratio, ratio);
        r = i;
      }
    }
    return r;
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &t_[r * cols_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (prow[j] == 0.0) continue;
      prow[j] *= inv;
      if (std::abs(prow[j]) < kDropTolerance) {
        prow[j] = 0.0;
      } else {
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    b_[r] *= inv;
    b0_[r] *= inv;

    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) {
        double v = row[j] - f * prow[j];
        row[j] = std::abs(v) < kDropTolerance ? 0.0 : v;
      }
      row[q] = 0.0;
      b_[i] -= f * b_[r];
      b0_[i] -= f * b0_[r];
      if (b_[i] < 0.0 && b_[i] > -kDropTolerance * 100) b_[i] = 0.0;
    }
    const double f = d_[q];
    if (f != 0.0) {
      for (std::size_t j : nz_) d_[j] -= f * prow[j];
      d_[q] = 0.0;
    }
    basis_[r] = q;
  }

  SimplexOptions opt_;
  std::size_t n_, m_, n_art_ = 0, cols_ = 0;
  std::vector<double> t_;
  std::vector<double> b_;
  std::vector<double> b0_;
  std::vector<double> d_;
  std::vector<std::size_t> basis_;
  std::vector<char> row_active_;
  std::vector<char> allowed_;
  std::vector<std::size_t> nz_;
  std::size_t iterations_ = 0;
  std::size_t max_iters_ = 0;
};

}  // namespace

Solution solve(const LinearProgram& lp, const SimplexOptions& options) {
  lp.check_shape();
  Tableau tab(lp, options);
  if (tab.needs_phase_one() && !tab.phase_one()) {
    Solution s;
    s.status = Status::Infeasible;
    return s;
  }
  if (tab.phase_two(lp.objective) == PhaseResult::Unbounded) {
    Solution s;
    s.status = Status::Unbounded;
    return s;
  }
  if (!tab.restore()) {
    Solution s;
    s.status = Status::Infeasible;
    return s;
  }
  return tab.extract(lp);
}

std::vector<double> FixedProgram::expand(
    std::span<const double> reduced_x,
    std::span<const std::pair<std::size_t, double>> fixed) const {
  std::size_t total = free_vars.size() + fixed.size();
  std::vector<double> x(total, 0.0);
  for (std::size_t i = 0; i < free_vars.size(); ++i) {
    x[free_vars[i]] = reduced_x[i];
  }
  for (const auto& [idx, value] : fixed) x[idx] = value;
  return x;
}

FixedProgram fix_variables(
    const LinearProgram& lp,
    std::span<const std::pair<std::size_t, double>> fixed, double tolerance) {
  lp.check_shape();
  std::vector<double> fixed_value(lp.num_vars, 0.0);
  std::vector<char> is_fixed(lp.num_vars, 0);
  for (const auto& [idx, value] : fixed) {
    if (idx >= lp.num_vars) throw std::invalid_argument("fixed index range");
    is_fixed[idx] = 1;
    fixed_value[idx] = value;
  }

  FixedProgram out;
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    if (is_fixed[j]) {
      out.objective_offset += lp.objective[j] * fixed_value[j];
    } else {
      out.free_vars.push_back(j);
    }
  }
  out.lp = LinearProgram(out.free_vars.size());
  for (std::size_t k = 0; k < out.free_vars.size(); ++k) {
    out.lp.objective[k] = lp.objective[out.free_vars[k]];
  }

  std::vector<double> row(out.free_vars.size());
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    double h = lp.rhs[i];
    bool any = false;
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
      if (is_fixed[j]) h -= lp.coef(i, j) * fixed_value[j];
    }
    for (std::size_t k = 0; k < out.free_vars.size(); ++k) {
      row[k] = lp.coef(i, out.free_vars[k]);
      any = any || row[k] != 0.0;
    }
    // A row left without free variables is either trivially satisfied or
    // kept so that the solver reports infeasibility.
    if (!any && h >= -tolerance) continue;
    if (h < 0.0 && h >= -tolerance) h = 0.0;
    out.lp.add_dense_row(row, h);
  }
  return out;
}

}  // namespace cachegame::lp
