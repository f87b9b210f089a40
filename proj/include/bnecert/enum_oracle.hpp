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

// Small-instance equilibrium oracle for the finite game, independent of the
// LP and fictitious-play paths. Pure profiles are enumerated first; for tiny
// games (n <= 2, at most 3 actions each) per-type support enumeration solves
// the indifference systems in exact rational arithmetic. Payoff doubles
// convert to rationals exactly, so a returned equilibrium is exact and its
// reported gaps are exact zeros; the double profile is its rounding.

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bnecert/discretize.hpp"
#include "bnecert/error.hpp"
#include "bnecert/solver.hpp"

namespace bnecert {

inline constexpr double kEnumProfileLimit = 1e6;

namespace detail {

using Rational = mpq_class;
using RationalMatrix = std::vector<std::vector<Rational>>;

inline RationalMatrix to_rational(const Matrix<>& m) {
  RationalMatrix out(m.rows(), std::vector<Rational>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = Rational(m(r, c));
  }
  return out;
}

class ExactGame {
 public:
  explicit ExactGame(const FiniteGame& fg)
      : n_(static_cast<std::size_t>(fg.level())),
        L_(fg.num_actions(Player::kOne)),
        H_(fg.num_actions(Player::kTwo)) {
    for (std::size_t x = 0; x < L_; ++x) {
      for (std::size_t y = 0; y < H_; ++y) {
        U_.push_back(to_rational(fg.U(x, y)));
        V_.push_back(to_rational(fg.V(x, y)));
      }
    }
  }

  std::size_t level() const { return n_; }
  std::size_t actions(Player p) const { return p == Player::kOne ? L_ : H_; }

  // Coefficient of opponent weight (j, b) in own interim payoff P(i, a).
  Rational coef(Player p, std::size_t i, std::size_t a, std::size_t j,
                std::size_t b) const {
    const Rational& entry =
        p == Player::kOne ? U_[a * H_ + b][i][j] : V_[b * H_ + a][j][i];
    return entry / static_cast<long>(n_);
  }

  RationalMatrix interim(Player p, const RationalMatrix& opponent) const {
    RationalMatrix P(n_, std::vector<Rational>(actions(p)));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t a = 0; a < actions(p); ++a) {
        Rational acc = 0;
        for (std::size_t j = 0; j < n_; ++j) {
          for (std::size_t b = 0; b < actions(other(p)); ++b) {
            if (opponent[j][b] != 0) acc += opponent[j][b] * coef(p, i, a, j, b);
          }
        }
        P[i][a] = acc;
      }
    }
    return P;
  }

  // Exact ex-ante gap max - current, scaled by 1/n.
  Rational gap(Player p, const RationalMatrix& own, const RationalMatrix& opponent) const {
    const RationalMatrix P = interim(p, opponent);
    Rational total = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      Rational best = P[i][0];
      Rational current = 0;
      for (std::size_t a = 0; a < P[i].size(); ++a) {
        if (P[i][a] > best) best = P[i][a];
        current += own[i][a] * P[i][a];
      }
      total += best - current;
    }
    return total / static_cast<long>(n_);
  }

 private:
  std::size_t n_, L_, H_;
  std::vector<RationalMatrix> U_, V_;
};

// Solves A z = rhs exactly; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_exact(RationalMatrix A,
                                                         std::vector<Rational> rhs) {
  const std::size_t m = A.size();
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    while (piv < m && A[piv][col] == 0) ++piv;
    if (piv == m) return std::nullopt;
    std::swap(A[piv], A[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || A[r][col] == 0) continue;
      const Rational f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < m; ++c) A[r][c] -= f * A[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<Rational> z(m);
  for (std::size_t r = 0; r < m; ++r) z[r] = rhs[r] / A[r][r];
  return z;
}

// Given own supports, finds the opponent mix that makes every own support
// action indifferent (and all others no better). Returns the opponent rows.
inline std::optional<RationalMatrix> indifference_mix(
    const ExactGame& game, Player p, const std::vector<unsigned>& own_support,
    const std::vector<unsigned>& opp_support) {
  const std::size_t n = game.level();
  const Player q = other(p);
  std::vector<std::pair<std::size_t, std::size_t>> unknowns;  // (j, b)
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t b = 0; b < game.actions(q); ++b) {
      if (opp_support[j] >> b & 1u) unknowns.emplace_back(j, b);
    }
  }
  const std::size_t vars = unknowns.size() + n;  // + one value per own type
  RationalMatrix A;
  std::vector<Rational> rhs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < game.actions(p); ++a) {
      if (!(own_support[i] >> a & 1u)) continue;
      std::vector<Rational> row(vars);
      for (std::size_t k = 0; k < unknowns.size(); ++k) {
        row[k] = game.coef(p, i, a, unknowns[k].first, unknowns[k].second);
      }
      row[unknowns.size() + i] = -1;
      A.push_back(std::move(row));
      rhs.emplace_back(0);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> row(vars);
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
      if (unknowns[k].first == j) row[k] = 1;
    }
    A.push_back(std::move(row));
    rhs.emplace_back(1);
  }
  if (A.size() != vars) return std::nullopt;
  const auto z = solve_exact(std::move(A), std::move(rhs));
  if (!z) return std::nullopt;
  RationalMatrix mix(n, std::vector<Rational>(game.actions(q)));
  for (std::size_t k = 0; k < unknowns.size(); ++k) {
    if ((*z)[k] < 0) return std::nullopt;
    mix[unknowns[k].first][unknowns[k].second] = (*z)[k];
  }
  // Actions outside the own support must not beat the common value.
  const RationalMatrix P = game.interim(p, mix);
  for (std::size_t i = 0; i < n; ++i) {
    const Rational& w = (*z)[unknowns.size() + i];
    for (std::size_t a = 0; a < game.actions(p); ++a) {
      if (P[i][a] > w) return std::nullopt;
    }
  }
  return mix;
}

inline Matrix<> to_double(const RationalMatrix& m) {
  Matrix<> out(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) out(r, c) = m[r][c].get_d();
  }
  return out;
}

inline RationalMatrix one_hot(const std::vector<std::size_t>& choice, std::size_t A) {
  RationalMatrix m(choice.size(), std::vector<Rational>(A));
  for (std::size_t i = 0; i < choice.size(); ++i) m[i][choice[i]] = 1;
  return m;
}

// Advances a mixed-radix counter; false after the last value.
inline bool next_choice(std::vector<std::size_t>& digits, std::size_t radix) {
  for (auto& d : digits) {
    if (++d < radix) return true;
    d = 0;
  }
  return false;
}

}  // namespace detail

inline SolverResult solve_enum(const FiniteGame& fg) {
  const auto n = static_cast<std::size_t>(fg.level());
  const std::size_t L = fg.num_actions(Player::kOne);
  const std::size_t H = fg.num_actions(Player::kTwo);
  const double profiles = std::pow(static_cast<double>(L), static_cast<double>(n)) *
                          std::pow(static_cast<double>(H), static_cast<double>(n));
  if (profiles > kEnumProfileLimit) {
    throw TooLarge("enumeration needs " + std::to_string(profiles) +
                   " pure profiles (limit 1e6)");
  }
  const detail::ExactGame exact(fg);
  long examined = 0;

  auto finish = [&](const detail::RationalMatrix& s, const detail::RationalMatrix& t,
                    const char* note) {
    const detail::Rational g1 = exact.gap(Player::kOne, s, t);
    const detail::Rational g2 = exact.gap(Player::kTwo, t, s);
    SolverResult r;
    r.profile = {sanitize_rows(detail::to_double(s)), sanitize_rows(detail::to_double(t))};
    r.backend = Backend::kEnumOracle;
    r.iterations = examined;
    score(fg, r);
    r.finite_gap1 = g1.get_d();
    r.finite_gap2 = g2.get_d();
    r.note = note;
    return r;
  };

  // Pure pass: for each pure profile of player 2, walk player 1's exact
  // best-response sets only.
  std::vector<std::size_t> ys(n, 0);
  do {
    Matrix<> t(n, H);
    for (std::size_t j = 0; j < n; ++j) t(j, ys[j]) = 1.0;
    const Matrix<> P1 = interim_payoffs(fg, Player::kOne, t);
    std::vector<std::vector<std::size_t>> br_sets(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = P1.row(i);
      const double best = *std::max_element(row.begin(), row.end());
      for (std::size_t x = 0; x < L; ++x) {
        if (row[x] == best) br_sets[i].push_back(x);
      }
    }
    std::vector<std::size_t> pick(n, 0);
    std::size_t combos = 1;
    for (const auto& set : br_sets) combos *= set.size();
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rest = c;
      std::vector<std::size_t> xs(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = br_sets[i][rest % br_sets[i].size()];
        rest /= br_sets[i].size();
      }
      ++examined;
      Matrix<> s(n, L);
      for (std::size_t i = 0; i < n; ++i) s(i, xs[i]) = 1.0;
      const Matrix<> P2 = interim_payoffs(fg, Player::kTwo, s);
      bool stable = true;
      for (std::size_t j = 0; j < n && stable; ++j) {
        const auto row = P2.row(j);
        stable = row[ys[j]] == *std::max_element(row.begin(), row.end());
      }
      if (!stable) continue;
      const auto S = detail::one_hot(xs, L);
      const auto T = detail::one_hot(ys, H);
      if (exact.gap(Player::kOne, S, T) == 0 && exact.gap(Player::kTwo, T, S) == 0) {
        return finish(S, T, "pure");
      }
    }
  } while (detail::next_choice(ys, H));

  if (n > 2 || L > 3 || H > 3) {
    throw PureNotFound("no pure equilibrium; support enumeration needs n <= 2 and <= 3 actions");
  }

  // Support pass over per-type nonempty supports (bit masks).
  std::vector<std::size_t> m1(n, 0), m2(n, 0);
  const std::size_t masks1 = (std::size_t{1} << L) - 1;
  const std::size_t masks2 = (std::size_t{1} << H) - 1;
  do {
    do {
      ++examined;
      std::vector<unsigned> S1(n), S2(n);
      std::size_t size1 = 0, size2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        S1[i] = static_cast<unsigned>(m1[i] + 1);
        S2[i] = static_cast<unsigned>(m2[i] + 1);
        size1 += static_cast<std::size_t>(std::popcount(S1[i]));
        size2 += static_cast<std::size_t>(std::popcount(S2[i]));
      }
      if (size1 != size2) continue;
      const auto t = detail::indifference_mix(exact, Player::kOne, S1, S2);
      if (!t) continue;
      const auto s = detail::indifference_mix(exact, Player::kTwo, S2, S1);
      if (!s) continue;
      if (exact.gap(Player::kOne, *s, *t) == 0 && exact.gap(Player::kTwo, *t, *s) == 0) {
        return finish(*s, *t, "support");
      }
    } while (detail::next_choice(m2, masks2));
  } while (detail::next_choice(m1, masks1));

  throw PureNotFound("neither pure nor support enumeration found an exact equilibrium");
}

}  // namespace bnecert
