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

// Equilibrium computation for the level-n finite game: exact best responses
// and gaps, the linear-program backend for games whose bilinear payoff terms
// cancel, and agent-form fictitious play for everything else.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bnecert/discretize.hpp"
#include "bnecert/error.hpp"
#include "bnecert/matrix.hpp"
#include "bnecert/model.hpp"
#include "bnecert/parallel.hpp"
#include "bnecert/simplex.hpp"

namespace bnecert {

enum class Backend { kLp, kFp, kEnumOracle };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::kLp: return "lp";
    case Backend::kFp: return "fp";
    case Backend::kEnumOracle: return "enum_oracle";
  }
  return "?";
}

struct SolverResult {
  BehavioralProfile profile;
  double finite_gap1 = 0.0;
  double finite_gap2 = 0.0;
  double value1 = 0.0;  // ex-ante profile values
  double value2 = 0.0;
  Backend backend = Backend::kLp;
  long iterations = 0;
  double objective = 0.0;  // C^K objective with slacks at -(per-type BR value)
  bool converged = true;
  std::string note;
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(SolverResult best)
      : Error(ErrorCode::kNoConvergence,
              "fictitious play stopped at gaps (" +
                  std::to_string(best.finite_gap1) + ", " +
                  std::to_string(best.finite_gap2) + ") after " +
                  std::to_string(best.iterations) + " iterations"),
        best_(std::move(best)) {}
  const SolverResult& best() const noexcept { return best_; }

 private:
  SolverResult best_;
};

// Relative window within which two action values count as tied; ties go to
// the lowest action index.
inline constexpr double kTieTolerance = 1e-12;

// P(i, a): expected payoff of own action a at own type i against the
// opponent's rows, with the uniform 1/n conditional over opponent types.
inline Matrix<> interim_payoffs(const FiniteGame& fg, Player p,
                                const Matrix<>& opponent) {
  const auto n = static_cast<std::size_t>(fg.level());
  const std::size_t own = fg.num_actions(p);
  const std::size_t opp = fg.num_actions(other(p));
  if (opponent.rows() != n || opponent.cols() != opp) {
    throw InvalidArgument("opponent profile has the wrong shape");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix<> P(n, own);
  auto type_row = [&](std::size_t i) {
    for (std::size_t a = 0; a < own; ++a) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t b = 0; b < opp; ++b) {
          const double w = opponent(j, b);
          if (w == 0.0) continue;
          acc += p == Player::kOne ? w * fg.U(a, b)(i, j) : w * fg.V(b, a)(j, i);
        }
      }
      P(i, a) = acc * inv_n;
    }
  };
  const bool big = n * n * own * opp > (std::size_t{1} << 16);
  parallel_for(n, type_row, big ? num_threads() : 1u);
  return P;
}

inline std::size_t argmax_lowest(std::span<const double> values) {
  double best = values[0];
  for (double v : values) best = std::max(best, v);
  const double window = kTieTolerance * std::fabs(best);
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (values[a] >= best - window) return a;
  }
  return 0;
}

struct FiniteBestResponse {
  std::vector<std::size_t> actions;  // per own type
  Matrix<> rows;                     // one-hot profile rows
  double value = 0.0;                // ex-ante best-response value
};

inline FiniteBestResponse best_response_from_interim(const Matrix<>& P) {
  const std::size_t n = P.rows();
  FiniteBestResponse br{std::vector<std::size_t>(n), Matrix<>(n, P.cols()), 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = P.row(i);
    br.actions[i] = argmax_lowest(row);
    br.rows(i, br.actions[i]) = 1.0;
    total += *std::max_element(row.begin(), row.end());
  }
  br.value = total / static_cast<double>(n);
  return br;
}

inline FiniteBestResponse finite_best_response(const FiniteGame& fg, Player p,
                                               const Matrix<>& opponent) {
  return best_response_from_interim(interim_payoffs(fg, p, opponent));
}

// Per-type regret max_a P(i,a) - sum_a own(i,a) P(i,a).
inline std::vector<double> per_type_regret(const Matrix<>& P, const Matrix<>& own) {
  std::vector<double> regret(P.rows());
  for (std::size_t i = 0; i < P.rows(); ++i) {
    const auto row = P.row(i);
    double current = 0.0;
    for (std::size_t a = 0; a < P.cols(); ++a) current += own(i, a) * row[a];
    regret[i] = *std::max_element(row.begin(), row.end()) - current;
  }
  return regret;
}

inline double ex_ante_value(const Matrix<>& P, const Matrix<>& own) {
  double total = 0.0;
  for (std::size_t i = 0; i < P.rows(); ++i) {
    for (std::size_t a = 0; a < P.cols(); ++a) total += own(i, a) * P(i, a);
  }
  return total / static_cast<double>(P.rows());
}

inline double ex_ante_value(const FiniteGame& fg, const BehavioralProfile& profile,
                            Player p) {
  return ex_ante_value(interim_payoffs(fg, p, profile.of(other(p))), profile.of(p));
}

// Best-response value minus current value, per player, from the same interim
// payoffs, so a profile that best-responds exactly has a gap of exactly 0.
inline std::pair<double, double> finite_gap(const FiniteGame& fg,
                                            const BehavioralProfile& profile) {
  const Matrix<> P1 = interim_payoffs(fg, Player::kOne, profile.t);
  const Matrix<> P2 = interim_payoffs(fg, Player::kTwo, profile.s);
  return {best_response_from_interim(P1).value - ex_ante_value(P1, profile.s),
          best_response_from_interim(P2).value - ex_ante_value(P2, profile.t)};
}

// C^K objective of the finite game at `profile`, with each slack set to the
// negated per-type best-response value:
//   sum_i a1(i) (s1(i) + E1_i) + sum_j a2(j) (s2(j) + E2_j).
inline double ck_objective(const FiniteGame& fg, const BehavioralProfile& profile,
                           std::span<const double> alpha1,
                           std::span<const double> alpha2) {
  double total = 0.0;
  for (Player p : {Player::kOne, Player::kTwo}) {
    const Matrix<> P = interim_payoffs(fg, p, profile.of(other(p)));
    const auto alpha = p == Player::kOne ? alpha1 : alpha2;
    const Matrix<>& own = profile.of(p);
    for (std::size_t i = 0; i < P.rows(); ++i) {
      const auto row = P.row(i);
      const double slack = -*std::max_element(row.begin(), row.end());
      double expected = 0.0;
      for (std::size_t a = 0; a < P.cols(); ++a) expected += own(i, a) * row[a];
      total += alpha[i] * slack + alpha[i] * expected;
    }
  }
  return total;
}

inline double weighted_regret(const FiniteGame& fg, const BehavioralProfile& profile,
                              std::span<const double> alpha1,
                              std::span<const double> alpha2) {
  double total = 0.0;
  for (Player p : {Player::kOne, Player::kTwo}) {
    const Matrix<> P = interim_payoffs(fg, p, profile.of(other(p)));
    const auto regret = per_type_regret(P, profile.of(p));
    const auto alpha = p == Player::kOne ? alpha1 : alpha2;
    for (std::size_t i = 0; i < regret.size(); ++i) total += alpha[i] * regret[i];
  }
  return total;
}

inline std::vector<double> uniform_alpha(int n) {
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

// Fills gaps, values and the C^K objective (uniform weights) for a profile.
inline void score(const FiniteGame& fg, SolverResult& r) {
  const Matrix<> P1 = interim_payoffs(fg, Player::kOne, r.profile.t);
  const Matrix<> P2 = interim_payoffs(fg, Player::kTwo, r.profile.s);
  r.value1 = ex_ante_value(P1, r.profile.s);
  r.value2 = ex_ante_value(P2, r.profile.t);
  r.finite_gap1 = best_response_from_interim(P1).value - r.value1;
  r.finite_gap2 = best_response_from_interim(P2).value - r.value2;
  const auto alpha = uniform_alpha(fg.level());
  r.objective = ck_objective(fg, r.profile, alpha, alpha);
}

// --- Linear-program condition -------------------------------------------

// Raw utilities sum to a constant: the bilinear terms of C^K then add up to
// a profile-independent constant with equal weights.
struct ZeroSumLike {
  double constant = 0.0;
};
// User multipliers with m2(t2) u(t1,t2) = -m1(t1) v(t1,t2) on the grid.
struct UserSupplied {};
struct NotDetected {};
using Prop1Check = std::variant<ZeroSumLike, UserSupplied, NotDetected>;

inline bool lp_applicable(const Prop1Check& c) {
  return !std::holds_alternative<NotDetected>(c);
}

inline std::string describe(const Prop1Check& c) {
  if (const auto* z = std::get_if<ZeroSumLike>(&c)) {
    return "ZeroSumLike(" + std::to_string(z->constant) + ")";
  }
  if (std::holds_alternative<UserSupplied>(c)) return "UserSupplied";
  return "NotDetected";
}

// Checks against raw (pre-shift) utilities on a grid x grid lattice of the
// unit square. User-supplied multipliers take precedence over detection.
inline Prop1Check check_prop1(const InfiniteGame& g, int grid) {
  if (grid < 2) throw InvalidArgument("check grid needs at least 2 points");
  const std::size_t L = g.num_actions(Player::kOne);
  const std::size_t H = g.num_actions(Player::kTwo);
  auto at = [&](int k) { return k == grid - 1 ? 1.0 : static_cast<double>(k) / (grid - 1); };

  if (g.has_multipliers()) {
    for (int a = 0; a < grid; ++a) {
      for (int c = 0; c < grid; ++c) {
        const double t1 = at(a);
        const double t2 = at(c);
        const double m1 = g.multiplier(Player::kOne, t1);
        const double m2 = g.multiplier(Player::kTwo, t2);
        if (!(m1 > 0.0) || !(m2 > 0.0)) {
          throw Prop1Violation("multipliers must be strictly positive");
        }
        for (std::size_t x = 0; x < L; ++x) {
          for (std::size_t y = 0; y < H; ++y) {
            const double lhs = m2 * g.raw_utility(Player::kOne, x, y, t1, t2);
            const double rhs = -m1 * g.raw_utility(Player::kTwo, x, y, t1, t2);
            const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1e-12});
            if (std::fabs(lhs - rhs) > 1e-6 * scale) {
              throw Prop1Violation("m2*u = -m1*v fails at (" + std::to_string(t1) +
                                   ", " + std::to_string(t2) + ")");
            }
          }
        }
      }
    }
    return UserSupplied{};
  }

  const double c0 = g.raw_utility(Player::kOne, 0, 0, 0.0, 0.0) +
                    g.raw_utility(Player::kTwo, 0, 0, 0.0, 0.0);
  const double tol = 1e-9 * std::max(1.0, std::fabs(c0));
  for (int a = 0; a < grid; ++a) {
    for (int c = 0; c < grid; ++c) {
      for (std::size_t x = 0; x < L; ++x) {
        for (std::size_t y = 0; y < H; ++y) {
          const double sum = g.raw_utility(Player::kOne, x, y, at(a), at(c)) +
                             g.raw_utility(Player::kTwo, x, y, at(a), at(c));
          if (std::fabs(sum - c0) > tol) return NotDetected{};
        }
      }
    }
  }
  return ZeroSumLike{c0};
}

// Weights that make the bilinear C^K terms cancel in the level-n game. The
// discretized marginal of every type is 1/n, so alpha_i = (1/n) / m_i.
inline std::pair<std::vector<double>, std::vector<double>> lp_weights(
    const InfiniteGame& g, const Prop1Check& check, int n) {
  if (!lp_applicable(check)) {
    throw InvalidArgument("linear-program condition not established");
  }
  auto alpha1 = uniform_alpha(n);
  auto alpha2 = uniform_alpha(n);
  if (std::holds_alternative<UserSupplied>(check)) {
    for (std::size_t i = 0; i < alpha1.size(); ++i) {
      alpha1[i] /= g.multiplier(Player::kOne, grid_type(n, i));
      alpha2[i] /= g.multiplier(Player::kTwo, grid_type(n, i));
    }
  }
  return {alpha1, alpha2};
}

// --- Backends ------------------------------------------------------------

// Solves C^K as a linear program. Variables: sigma1 (n x L), sigma2 (n x H),
// free slacks s1, s2 (n each). The dropped bilinear terms are constant when
// the weights come from lp_weights.
inline SolverResult solve_lp(const FiniteGame& fg, std::span<const double> alpha1,
                             std::span<const double> alpha2,
                             long pivot_cap = lp::kDefaultPivotCap) {
  const auto n = static_cast<std::size_t>(fg.level());
  const std::size_t L = fg.num_actions(Player::kOne);
  const std::size_t H = fg.num_actions(Player::kTwo);
  if (alpha1.size() != n || alpha2.size() != n) {
    throw InvalidArgument("alpha vectors must have one entry per type");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(alpha1[i] > 0.0) || !(alpha2[i] > 0.0) || !std::isfinite(alpha1[i]) ||
        !std::isfinite(alpha2[i])) {
      throw InvalidArgument("alpha weights must be positive and finite");
    }
  }
  auto sigma1 = [&](std::size_t i, std::size_t x) { return i * L + x; };
  auto sigma2 = [&](std::size_t j, std::size_t y) { return n * L + j * H + y; };
  auto slack1 = [&](std::size_t i) { return n * (L + H) + i; };
  auto slack2 = [&](std::size_t j) { return n * (L + H) + n + j; };

  lp::LinearProgram prog(n * (L + H) + 2 * n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    prog.free[slack1(i)] = true;
    prog.free[slack2(i)] = true;
    prog.objective[slack1(i)] = alpha1[i];
    prog.objective[slack2(i)] = alpha2[i];
  }
  // (c) every pure action of player 1 earns at most -s1(i).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < L; ++x) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t y = 0; y < H; ++y) {
          terms.emplace_back(sigma2(j, y), inv_n * fg.U(x, y)(i, j));
        }
      }
      terms.emplace_back(slack1(i), 1.0);
      prog.add_row(std::move(terms), lp::Sense::kLessEqual, 0.0);
    }
  }
  // (a) every pure action of player 2 earns at most -s2(j).
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t y = 0; y < H; ++y) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t x = 0; x < L; ++x) {
          terms.emplace_back(sigma1(i, x), inv_n * fg.V(x, y)(i, j));
        }
      }
      terms.emplace_back(slack2(j), 1.0);
      prog.add_row(std::move(terms), lp::Sense::kLessEqual, 0.0);
    }
  }
  // (b), (d) rows are distributions.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<std::size_t, double>> row1, row2;
    for (std::size_t x = 0; x < L; ++x) row1.emplace_back(sigma1(i, x), 1.0);
    for (std::size_t y = 0; y < H; ++y) row2.emplace_back(sigma2(i, y), 1.0);
    prog.add_row(std::move(row1), lp::Sense::kEqual, 1.0);
    prog.add_row(std::move(row2), lp::Sense::kEqual, 1.0);
  }

  const lp::Solution sol = lp::maximize(prog, pivot_cap);
  Matrix<> s(n, L), t(n, H);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < L; ++x) s(i, x) = sol.x[sigma1(i, x)];
    for (std::size_t y = 0; y < H; ++y) t(i, y) = sol.x[sigma2(i, y)];
  }
  SolverResult r;
  r.profile = {sanitize_rows(std::move(s)), sanitize_rows(std::move(t))};
  r.backend = Backend::kLp;
  r.iterations = sol.pivots;
  score(fg, r);
  r.objective = ck_objective(fg, r.profile, alpha1, alpha2);
  return r;
}

// Agent-form fictitious play. Every type of both players best-responds to
// the opponent's running average; averages move with weight 1/(k+1). Each
// iteration scores both the average profile and the pure best-response pair
// and keeps the best by max(gap1, gap2).
inline SolverResult solve_fp(const FiniteGame& fg, long max_iters, double target_gap) {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  const int n = fg.level();
  const std::size_t L = fg.num_actions(Player::kOne);
  const std::size_t H = fg.num_actions(Player::kTwo);
  BehavioralProfile avg = BehavioralProfile::uniform(n, L, H);
  Matrix<> P1 = interim_payoffs(fg, Player::kOne, avg.t);
  Matrix<> P2 = interim_payoffs(fg, Player::kTwo, avg.s);

  BehavioralProfile best_profile = avg;
  double best_gap = std::numeric_limits<double>::infinity();
  long best_iter = 0;
  auto gaps_of = [](const Matrix<>& Q1, const Matrix<>& Q2, const BehavioralProfile& pr) {
    const double g1 = best_response_from_interim(Q1).value - ex_ante_value(Q1, pr.s);
    const double g2 = best_response_from_interim(Q2).value - ex_ante_value(Q2, pr.t);
    return std::max(g1, g2);
  };

  long k = 1;
  for (; k <= max_iters; ++k) {
    const double avg_gap = gaps_of(P1, P2, avg);
    if (avg_gap < best_gap) {
      best_gap = avg_gap;
      best_profile = avg;
      best_iter = k;
    }
    if (best_gap <= target_gap) break;

    const FiniteBestResponse br1 = best_response_from_interim(P1);
    const FiniteBestResponse br2 = best_response_from_interim(P2);
    const BehavioralProfile pure{br1.rows, br2.rows};
    const Matrix<> Q1 = interim_payoffs(fg, Player::kOne, pure.t);
    const Matrix<> Q2 = interim_payoffs(fg, Player::kTwo, pure.s);
    const double pure_gap = gaps_of(Q1, Q2, pure);
    if (pure_gap < best_gap) {
      best_gap = pure_gap;
      best_profile = pure;
      best_iter = k;
    }
    if (best_gap <= target_gap) break;

    const double step = 1.0 / static_cast<double>(k + 1);
    auto blend = [step](Matrix<>& into, const Matrix<>& target) {
      for (std::size_t r = 0; r < into.rows(); ++r) {
        for (std::size_t c = 0; c < into.cols(); ++c) {
          into(r, c) += step * (target(r, c) - into(r, c));
        }
      }
    };
    blend(avg.s, pure.s);
    blend(avg.t, pure.t);
    blend(P1, Q1);  // interim payoffs are linear in the opponent profile
    blend(P2, Q2);
  }

  SolverResult r;
  r.profile = std::move(best_profile);
  r.backend = Backend::kFp;
  r.iterations = std::min(k, max_iters);
  score(fg, r);
  r.note = "best iterate " + std::to_string(best_iter);
  r.converged = std::max(r.finite_gap1, r.finite_gap2) <= target_gap + 1e-12;
  if (!r.converged) throw NoConvergence(std::move(r));
  return r;
}

}  // namespace bnecert
