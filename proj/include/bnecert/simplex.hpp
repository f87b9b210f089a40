// Copyright 2026 The bnecert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Two-phase dense-tableau simplex with Bland's anti-cycling rule.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bnecert/error.hpp"
#include "bnecert/matrix.hpp"

namespace bnecert::lp {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

// maximize objective . x  subject to rows, x_k >= 0 unless free[k].
struct LinearProgram {
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    Sense sense = Sense::kLessEqual;
    double rhs = 0.0;
  };

  explicit LinearProgram(std::size_t num_vars)
      : objective(num_vars, 0.0), free(num_vars, false) {}

  std::size_t num_vars() const noexcept { return objective.size(); }

  void add_row(std::vector<std::pair<std::size_t, double>> terms, Sense sense,
               double rhs) {
    for (const auto& [k, c] : terms) {
      if (k >= num_vars()) throw InvalidArgument("LP row references unknown variable");
      (void)c;
    }
    rows.push_back({std::move(terms), sense, rhs});
  }

  std::vector<double> objective;
  std::vector<bool> free;
  std::vector<Row> rows;
};

struct Solution {
  std::vector<double> x;
  double objective = 0.0;
  long pivots = 0;
};

inline constexpr long kDefaultPivotCap = 100'000;

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : a_(rows + 1, cols + 1), basis_(rows, 0) {}

  std::size_t rows() const { return basis_.size(); }
  std::size_t cols() const { return a_.cols() - 1; }
  double& at(std::size_t r, std::size_t c) { return a_(r, c); }
  double& rhs(std::size_t r) { return a_(r, cols()); }
  // Objective row stores reduced costs d_j; entering needs d_j > 0.
  double& cost(std::size_t c) { return a_(rows(), c); }
  double& value() { return a_(rows(), cols()); }
  std::vector<std::size_t>& basis() { return basis_; }

  // Keeps the current constraint rows as the reference for reinversion.
  void snapshot() { orig_ = a_; }
  void set_costs(std::vector<double> c) { costs_ = std::move(c); }

  // Rebuilds every row as B^-1 [A | b] from the reference rows and the
  // current basis, then the reduced costs from the phase costs. Leaves the
  // tableau alone if B is numerically singular.
  bool reinvert(const std::vector<bool>& allowed) {
    const std::size_t m = rows();
    const std::size_t width = a_.cols();
    Matrix<> aug(m, m + width);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t k = 0; k < m; ++k) aug(r, k) = orig_(r, basis_[k]);
      for (std::size_t c = 0; c < width; ++c) aug(r, m + c) = orig_(r, c);
    }
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t piv = k;
      for (std::size_t r = k + 1; r < m; ++r) {
        if (std::fabs(aug(r, k)) > std::fabs(aug(piv, k))) piv = r;
      }
      if (std::fabs(aug(piv, k)) < 1e-13) return false;
      if (piv != k) {
        for (std::size_t c = k; c < m + width; ++c) std::swap(aug(piv, c), aug(k, c));
      }
      const double d = aug(k, k);
      for (std::size_t c = k; c < m + width; ++c) aug(k, c) /= d;
      for (std::size_t r = 0; r < m; ++r) {
        if (r == k) continue;
        const double f = aug(r, k);
        if (f == 0.0) continue;
        for (std::size_t c = k; c < m + width; ++c) aug(r, c) -= f * aug(k, c);
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < width; ++c) a_(r, c) = aug(r, m + c);
      a_(r, basis_[r]) = 1.0;
    }
    for (std::size_t c = 0; c < width; ++c) {
      double d = c < cols() ? costs_[c] : 0.0;
      for (std::size_t r = 0; r < m; ++r) d -= costs_[basis_[r]] * a_(r, c);
      a_(m, c) = d;
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t q = 0; q < m; ++q) {
        if (q != r) a_(q, basis_[r]) = 0.0;
      }
      a_(m, basis_[r]) = 0.0;
    }
    for (std::size_t c = 0; c < cols(); ++c) {
      if (!allowed[c]) a_(m, c) = 0.0;
    }
    return true;
  }

  void pivot(std::size_t r, std::size_t c) {
    const std::size_t width = a_.cols();
    const double p = a_(r, c);
    auto pivot_row = a_.row(r);
    for (std::size_t k = 0; k < width; ++k) pivot_row[k] /= p;
    pivot_row[c] = 1.0;
    for (std::size_t i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = a_(i, c);
      if (f == 0.0) continue;
      auto row = a_.row(i);
      for (std::size_t k = 0; k < width; ++k) row[k] -= f * pivot_row[k];
      row[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable
  // among tied ratios. Returns pivots used; throws on unbounded or stall.
  long optimize(const std::vector<bool>& allowed, long cap, long used) {
    constexpr double kEps = 1e-11;
    constexpr double kCostEps = 1e-9;  // reduced costs below this are round-off
    constexpr double kPivotRel = 1e-7;
    constexpr long kRefresh = 50;
    long pivots = 0;
    long since_refresh = 0;
    while (true) {
      if (since_refresh >= kRefresh) {
        reinvert(allowed);
        since_refresh = 0;
      }
      std::size_t enter = cols();
      for (std::size_t c = 0; c < cols(); ++c) {
        if (allowed[c] && cost(c) > kCostEps) {
          enter = c;
          break;
        }
      }
      if (enter == cols()) {
        // Confirm optimality on a freshly rebuilt tableau.
        if (since_refresh == 0 || !reinvert(allowed)) return pivots;
        since_refresh = 0;
        continue;
      }
      // Pivot elements below kPivotRel * (largest entry in the column) count
      // as zero; tiny pivots would amplify round-off across the tableau.
      double scale = 0.0;
      for (std::size_t r = 0; r < rows(); ++r) scale = std::max(scale, std::fabs(at(r, enter)));
      std::size_t leave = ratio_test(enter, std::max(kEps, kPivotRel * scale));
      // Nothing above the relative floor: fall back to the absolute one
      // before calling the column unbounded.
      if (leave == rows()) leave = ratio_test(enter, kEps);
      if (leave == rows()) throw UnboundedObjective("LP objective is unbounded");
      if (used + pivots >= cap) {
        throw SimplexStall("simplex pivot cap of " + std::to_string(cap) + " reached");
      }
      pivot(leave, enter);
      ++pivots;
      ++since_refresh;
    }
  }

 private:
  Matrix<> orig_;
  std::vector<double> costs_;

  // Bland's leaving row among pivots above floor; rows() if none.
  std::size_t ratio_test(std::size_t enter, double floor) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows(); ++r) {
      const double coef = at(r, enter);
      if (coef > floor) best = std::min(best, std::max(0.0, rhs(r)) / coef);
    }
    std::size_t leave = rows();
    for (std::size_t r = 0; r < rows(); ++r) {
      const double coef = at(r, enter);
      if (coef <= floor) continue;
      const double ratio = std::max(0.0, rhs(r)) / coef;
      if (ratio <= best + 1e-12 && (leave == rows() || basis_[r] < basis_[leave])) {
        leave = r;
      }
    }
    return leave;
  }

  Matrix<> a_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline Solution maximize(const LinearProgram& lp, long pivot_cap = kDefaultPivotCap) {
  // Column layout: structural (free variables split into +/- parts), one
  // slack or surplus per inequality, one artificial per row that needs it.
  const std::size_t n = lp.num_vars();
  std::vector<std::size_t> plus(n), minus(n, SIZE_MAX);
  std::size_t cols = 0;
  for (std::size_t k = 0; k < n; ++k) {
    plus[k] = cols++;
    if (lp.free[k]) minus[k] = cols++;
  }
  const std::size_t m = lp.rows.size();
  std::vector<double> sign(m, 1.0);
  std::vector<std::size_t> slack(m, SIZE_MAX);
  for (std::size_t r = 0; r < m; ++r) {
    if (lp.rows[r].sense != Sense::kEqual) slack[r] = cols++;
  }
  // Flip rows with negative rhs; a slack then acts as surplus.
  std::vector<std::size_t> artificial(m, SIZE_MAX);
  for (std::size_t r = 0; r < m; ++r) {
    if (lp.rows[r].rhs < 0.0) sign[r] = -1.0;
    const bool slack_is_basic =
        slack[r] != SIZE_MAX &&
        ((lp.rows[r].sense == Sense::kLessEqual) == (sign[r] > 0.0));
    if (!slack_is_basic) artificial[r] = cols++;
  }

  detail::Tableau tab(m, cols);
  for (std::size_t r = 0; r < m; ++r) {
    const auto& row = lp.rows[r];
    for (const auto& [k, c] : row.terms) {
      tab.at(r, plus[k]) += sign[r] * c;
      if (minus[k] != SIZE_MAX) tab.at(r, minus[k]) -= sign[r] * c;
    }
    if (slack[r] != SIZE_MAX) {
      tab.at(r, slack[r]) = sign[r] * (row.sense == Sense::kLessEqual ? 1.0 : -1.0);
    }
    tab.rhs(r) = sign[r] * row.rhs;
    if (artificial[r] != SIZE_MAX) {
      tab.at(r, artificial[r]) = 1.0;
      tab.basis()[r] = artificial[r];
    } else {
      tab.basis()[r] = slack[r];
    }
  }

  tab.snapshot();
  std::vector<bool> allowed(cols, true);
  long pivots = 0;

  // Phase 1: maximize -sum(artificials).
  bool need_phase1 = false;
  for (std::size_t r = 0; r < m; ++r) {
    if (artificial[r] == SIZE_MAX) continue;
    need_phase1 = true;
    for (std::size_t c = 0; c <= cols; ++c) {
      if (c == artificial[r]) continue;
      if (c == cols) {
        tab.value() += tab.rhs(r);
      } else {
        tab.cost(c) += tab.at(r, c);
      }
    }
  }
  if (need_phase1) {
    std::vector<double> c_phase1(cols, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      if (artificial[r] != SIZE_MAX) c_phase1[artificial[r]] = -1.0;
    }
    tab.set_costs(std::move(c_phase1));
    pivots += tab.optimize(allowed, pivot_cap, pivots);
    if (tab.value() > 1e-9) throw Infeasible("LP has no feasible point");
    // Drive remaining artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t b = tab.basis()[r];
      bool is_artificial = false;
      for (std::size_t q = 0; q < m; ++q) is_artificial |= artificial[q] == b;
      if (!is_artificial) continue;
      std::size_t best = cols;
      for (std::size_t c = 0; c < cols; ++c) {
        bool c_artificial = false;
        for (std::size_t q = 0; q < m; ++q) c_artificial |= artificial[q] == c;
        if (!c_artificial && std::fabs(tab.at(r, c)) > 1e-9 &&
            (best == cols || std::fabs(tab.at(r, c)) > std::fabs(tab.at(r, best)))) {
          best = c;
        }
      }
      if (best != cols) {
        tab.pivot(r, best);
        ++pivots;
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (artificial[r] != SIZE_MAX) allowed[artificial[r]] = false;
    }
  }

  // Phase 2: install the real objective as reduced costs.
  std::vector<double> c_full(cols, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    c_full[plus[k]] = lp.objective[k];
    if (minus[k] != SIZE_MAX) c_full[minus[k]] = -lp.objective[k];
  }
  tab.set_costs(c_full);
  for (std::size_t c = 0; c < cols; ++c) tab.cost(c) = c_full[c];
  tab.value() = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double cb = c_full[tab.basis()[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) tab.cost(c) -= cb * tab.at(r, c);
    tab.value() -= cb * tab.rhs(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!allowed[c]) tab.cost(c) = 0.0;
  }
  pivots += tab.optimize(allowed, pivot_cap, pivots);

  std::vector<double> column_value(cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) column_value[tab.basis()[r]] = tab.rhs(r);
  Solution sol;
  sol.x.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sol.x[k] = column_value[plus[k]] -
               (minus[k] != SIZE_MAX ? column_value[minus[k]] : 0.0);
    sol.objective += lp.objective[k] * sol.x[k];
  }
  sol.pivots = pivots;
  return sol;
}

}  // namespace bnecert::lp
