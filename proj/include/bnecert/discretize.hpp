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

// Level-n discretization of an InfiniteGame and lifting of finite-game
// profiles to step-function distributional strategies.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bnecert/error.hpp"
#include "bnecert/matrix.hpp"
#include "bnecert/model.hpp"
#include "bnecert/parallel.hpp"

namespace bnecert {

// Type i (0-based) of a level-n grid sits at (i + 1) / n.
inline double grid_type(int n, std::size_t i) {
  return static_cast<double>(i + 1) / static_cast<double>(n);
}

// The finite game at level n. Storage is 0-based: U(x, y)(i, j) is the
// assimilated payoff u^{x,y}((i+1)/n, (j+1)/n). The prior on the n x n type
// grid is uniform (1/n^2 per joint type) because it is folded into U and V.
class FiniteGame {
 public:
  FiniteGame(int n, std::size_t L, std::size_t H, std::vector<Matrix<>> U,
             std::vector<Matrix<>> V)
      : n_(n), L_(L), H_(H), U_(std::move(U)), V_(std::move(V)) {
    if (n < 1) throw InvalidArgument("level must be >= 1");
    if (L == 0 || H == 0) throw InvalidArgument("each player needs an action");
    if (U_.size() != L * H || V_.size() != L * H) {
      throw InvalidArgument("need one payoff matrix per action pair");
    }
    for (const auto* table : {&U_, &V_}) {
      for (const auto& m : *table) {
        if (m.rows() != static_cast<std::size_t>(n) ||
            m.cols() != static_cast<std::size_t>(n)) {
          throw InvalidArgument("payoff matrices must be n x n");
        }
        for (double v : m.data()) {
          if (!std::isfinite(v)) throw NonFinite("payoff entry is not finite");
          if (v < 0.0) throw InvalidArgument("payoff entries must be >= 0");
        }
      }
    }
  }

  int level() const noexcept { return n_; }
  std::size_t num_actions(Player p) const noexcept {
    return p == Player::kOne ? L_ : H_;
  }

  const Matrix<>& U(std::size_t x, std::size_t y) const { return U_[x * H_ + y]; }
  const Matrix<>& V(std::size_t x, std::size_t y) const { return V_[x * H_ + y]; }
  const Matrix<>& payoff(Player p, std::size_t x, std::size_t y) const {
    return p == Player::kOne ? U(x, y) : V(x, y);
  }

 private:
  int n_;
  std::size_t L_;
  std::size_t H_;
  std::vector<Matrix<>> U_;
  std::vector<Matrix<>> V_;
};

// Samples the assimilated payoffs at the grid {1/n, ..., n/n}^2.
inline FiniteGame build_finite(const InfiniteGame& g, int n) {
  if (n < 1) throw InvalidArgument("level must be >= 1");
  const std::size_t L = g.num_actions(Player::kOne);
  const std::size_t H = g.num_actions(Player::kTwo);
  const auto size = static_cast<std::size_t>(n);
  std::vector<Matrix<>> U(L * H, Matrix<>(size, size));
  std::vector<Matrix<>> V(L * H, Matrix<>(size, size));
  parallel_for(size, [&](std::size_t i) {
    const double t1 = grid_type(n, i);
    for (std::size_t j = 0; j < size; ++j) {
      const double t2 = grid_type(n, j);
      for (std::size_t x = 0; x < L; ++x) {
        for (std::size_t y = 0; y < H; ++y) {
          const double u = g.payoff(Player::kOne, x, y, t1, t2);
          const double v = g.payoff(Player::kTwo, x, y, t1, t2);
          if (!std::isfinite(u) || !std::isfinite(v)) {
            throw NonFinite("payoff is not finite at grid point (" +
                            std::to_string(t1) + ", " + std::to_string(t2) + ")");
          }
          U[x * H + y](i, j) = u;
          V[x * H + y](i, j) = v;
        }
      }
    }
  });
  return FiniteGame(n, L, H, std::move(U), std::move(V));
}

// Per-type action distributions: s is n x L, t is n x H.
struct BehavioralProfile {
  Matrix<> s;
  Matrix<> t;

  static BehavioralProfile uniform(int n, std::size_t L, std::size_t H) {
    const auto size = static_cast<std::size_t>(n);
    return {Matrix<>(size, L, 1.0 / static_cast<double>(L)),
            Matrix<>(size, H, 1.0 / static_cast<double>(H))};
  }

  const Matrix<>& of(Player p) const { return p == Player::kOne ? s : t; }
  Matrix<>& of(Player p) { return p == Player::kOne ? s : t; }
};

// True when every row is nonnegative (to -tol) and sums to 1 within tol.
inline bool is_row_stochastic(const Matrix<>& m, double tol = 1e-12) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) {
      if (!(v >= -tol)) return false;
      sum += v;
    }
    if (std::fabs(sum - 1.0) > tol) return false;
  }
  return true;
}

// Clamps round-off negatives to zero and renormalizes each row.
inline Matrix<> sanitize_rows(Matrix<> m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double sum = 0.0;
    for (double& v : row) {
      v = std::max(0.0, v);
      sum += v;
    }
    if (!(sum > 0.0)) throw InvalidArgument("row has no positive mass");
    for (double& v : row) v /= sum;
  }
  return m;
}

// Distributional strategy F^a(theta) = (1/n) sum_{i <= floor(n theta)} w[i][a]
// built from a level-n behavioral strategy. Row weights are stored as
// integers in units of 2^-40 that sum to exactly 2^40 per row, so every
// partial sum is an exact double and the grid identity
// sum_a F^a(k/n) * n = k holds without rounding.
class StepStrategy {
 public:
  static constexpr int kMassBits = 40;
  static constexpr std::int64_t kUnit = std::int64_t{1} << kMassBits;
  static constexpr int kMaxLevel = 4096;  // keeps n * 2^40 below 2^53

  StepStrategy(Player player, const Matrix<>& weights, double tol = 1e-9)
      : player_(player),
        n_(static_cast<int>(weights.rows())),
        A_(weights.cols()) {
    if (n_ < 1 || n_ > kMaxLevel) {
      throw InvalidArgument("step strategy level must be in [1, 4096]");
    }
    if (A_ == 0) throw InvalidArgument("step strategy needs an action");
    if (!is_row_stochastic(weights, tol)) {
      throw InvalidArgument("weights are not row-stochastic");
    }
    units_.resize(static_cast<std::size_t>(n_) * A_);
    prefix_.assign((static_cast<std::size_t>(n_) + 1) * A_, 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) {
      std::int64_t total = 0;
      std::size_t largest = 0;
      for (std::size_t a = 0; a < A_; ++a) {
        const double w = std::max(0.0, weights(i, a));
        const auto q = static_cast<std::int64_t>(std::llround(w * kUnit));
        units_[i * A_ + a] = q;
        total += q;
        if (q > units_[i * A_ + largest]) largest = a;
      }
      units_[i * A_ + largest] += kUnit - total;
      for (std::size_t a = 0; a < A_; ++a) {
        prefix_[(i + 1) * A_ + a] =
            prefix_[i * A_ + a] +
            static_cast<double>(units_[i * A_ + a]) / static_cast<double>(kUnit);
      }
    }
  }

  Player player() const noexcept { return player_; }
  int level() const noexcept { return n_; }
  std::size_t num_actions() const noexcept { return A_; }

  // floor(n theta) with a 1e-12 upward nudge so theta = k/n lands on k.
  int grid_index(double theta) const {
    const double k = std::floor(static_cast<double>(n_) * theta + 1e-12);
    if (k <= 0.0) return 0;
    if (k >= n_) return n_;
    return static_cast<int>(k);
  }

  double operator()(std::size_t a, double theta) const {
    if (a >= A_) throw UnknownAction("action index " + std::to_string(a));
    return prefix_[static_cast<std::size_t>(grid_index(theta)) * A_ + a] /
           static_cast<double>(n_);
  }

  // Row weight w[i][a] after quantization.
  double weight(std::size_t i, std::size_t a) const {
    return static_cast<double>(units_[i * A_ + a]) / static_cast<double>(kUnit);
  }
  std::int64_t weight_units(std::size_t i, std::size_t a) const {
    return units_[i * A_ + a];
  }
  // n * F^a(k/n) in units of 2^-40; exact.
  std::int64_t cumulative_units(std::size_t a, int k) const {
    std::int64_t sum = 0;
    for (int i = 0; i < k; ++i) sum += units_[static_cast<std::size_t>(i) * A_ + a];
    return sum;
  }

  double atom_theta(std::size_t i) const { return grid_type(n_, i); }
  double atom_mass(std::size_t i, std::size_t a) const {
    return weight(i, a) / static_cast<double>(n_);
  }

  // Behavioral distribution of the type cell ((i)/n, (i+1)/n] containing theta.
  std::vector<double> distribution_at(double theta) const {
    int cell = static_cast<int>(std::ceil(static_cast<double>(n_) * theta - 1e-12)) - 1;
    cell = std::clamp(cell, 0, n_ - 1);
    std::vector<double> out(A_);
    for (std::size_t a = 0; a < A_; ++a) out[a] = weight(static_cast<std::size_t>(cell), a);
    return out;
  }

 private:
  Player player_;
  int n_;
  std::size_t A_;
  std::vector<std::int64_t> units_;
  std::vector<double> prefix_;  // (n + 1) x A, prefix_[k][a] = sum_{i<k} w[i][a]
};

inline StepStrategy lift(const BehavioralProfile& profile, Player p) {
  return StepStrategy(p, profile.of(p));
}

inline double eval_step(const StepStrategy& F, std::size_t a, double theta) {
  return F(a, theta);
}

}  // namespace bnecert
