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

// Epsilon-equilibrium certificates for lifted step strategies in the
// continuous-type game. Profile values are exact sums over atoms; the
// best-response value integrates the pointwise best action against the
// opponent's atoms with adaptive Simpson quadrature.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnecert/discretize.hpp"
#include "bnecert/error.hpp"
#include "bnecert/model.hpp"
#include "bnecert/parallel.hpp"
#include "bnecert/quadrature.hpp"

namespace bnecert {

struct Certificate {
  int level = 0;
  double epsilon_requested = 0.0;
  double gap1 = 0.0;
  double gap2 = 0.0;
  double quad_error1 = 0.0;
  double quad_error2 = 0.0;
  double value1 = 0.0;
  double value2 = 0.0;
  bool certified = false;
  double wall_time = 0.0;  // seconds

  double gap(Player p) const { return p == Player::kOne ? gap1 : gap2; }
  double quad_error(Player p) const {
    return p == Player::kOne ? quad_error1 : quad_error2;
  }
};

struct BestResponseValue {
  double value = 0.0;
  double error = 0.0;
};

inline double default_quad_tol(double epsilon) {
  return std::max(epsilon / 100.0, 1e-9);
}

namespace detail {

inline void check_strategy(const InfiniteGame& g, const StepStrategy& S, Player p) {
  if (S.player() != p) {
    throw InvalidArgument("strategy for player " + std::to_string(number(p)) +
                          " belongs to player " + std::to_string(number(S.player())));
  }
  if (S.num_actions() != g.num_actions(p)) {
    throw InvalidArgument("strategy action count does not match the game");
  }
}

}  // namespace detail

// Ex-ante value of `player` when player 1 uses F and player 2 uses G:
// sum over atom pairs of mass_F * mass_G * assimilated payoff. The levels of
// F and G may differ.
inline double profile_value(const InfiniteGame& g, const StepStrategy& F,
                            const StepStrategy& G, Player player) {
  detail::check_strategy(g, F, Player::kOne);
  detail::check_strategy(g, G, Player::kTwo);
  const auto n1 = static_cast<std::size_t>(F.level());
  const auto n2 = static_cast<std::size_t>(G.level());
  const std::size_t L = F.num_actions();
  const std::size_t H = G.num_actions();
  std::vector<double> rows(n1, 0.0);
  parallel_for(n1, [&](std::size_t i) {
    const double t1 = F.atom_theta(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n2; ++j) {
      const double t2 = G.atom_theta(j);
      for (std::size_t x = 0; x < L; ++x) {
        const double mf = F.atom_mass(i, x);
        if (mf == 0.0) continue;
        for (std::size_t y = 0; y < H; ++y) {
          const double mg = G.atom_mass(j, y);
          if (mg == 0.0) continue;
          acc += mf * mg * g.payoff(player, x, y, t1, t2);
        }
      }
    }
    rows[i] = acc;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

// Value of player's best reply to an atomic opponent: the integral over own
// type theta of max over own actions of sum_atoms mass * payoff(theta, atom).
// Pieces are split at every multiple of 1/n_opponent.
inline BestResponseValue br_value_infinite(const InfiniteGame& g, Player player,
                                           const StepStrategy& opponent,
                                           double quad_tol) {
  if (!(quad_tol > 0.0)) throw InvalidArgument("quad_tol must be > 0");
  const Player q = other(player);
  detail::check_strategy(g, opponent, q);
  const auto m = static_cast<std::size_t>(opponent.level());
  const std::size_t own = g.num_actions(player);
  const std::size_t opp = opponent.num_actions();

  // Opponent atoms with positive mass, grouped by type.
  struct Atom {
    double theta;
    std::vector<std::pair<std::size_t, double>> actions;
  };
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < m; ++j) {
    Atom atom{opponent.atom_theta(j), {}};
    for (std::size_t b = 0; b < opp; ++b) {
      const double mass = opponent.atom_mass(j, b);
      if (mass > 0.0) atom.actions.emplace_back(b, mass);
    }
    if (!atom.actions.empty()) atoms.push_back(std::move(atom));
  }

  auto integrand = [&](double theta) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < own; ++a) {
      double acc = 0.0;
      for (const Atom& atom : atoms) {
        const double t1 = player == Player::kOne ? theta : atom.theta;
        const double t2 = player == Player::kOne ? atom.theta : theta;
        const double density = g.prior(t1, t2);
        double inner = 0.0;
        for (const auto& [b, mass] : atom.actions) {
          const std::size_t x = player == Player::kOne ? a : b;
          const std::size_t y = player == Player::kOne ? b : a;
          inner += mass * g.shifted_utility(player, x, y, t1, t2);
        }
        acc += density * inner;
      }
      best = std::max(best, acc);
    }
    return best;
  };

  std::vector<double> breaks(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    breaks[k] = k == m ? 1.0 : static_cast<double>(k) / static_cast<double>(m);
  }
  const QuadratureResult r = integrate_pieces(integrand, std::span<const double>(breaks),
                                              quad_tol);
  return {r.value, r.error};
}

// Checks the epsilon-equilibrium condition for (F, G). A player passes when
// gap + quadrature error <= epsilon.
inline Certificate certify(const InfiniteGame& g, const StepStrategy& F,
                           const StepStrategy& G, double epsilon, double quad_tol) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!(quad_tol > 0.0) || quad_tol > epsilon / 10.0) {
    throw InvalidArgument("quad_tol must be in (0, epsilon/10]");
  }
  const auto start = std::chrono::steady_clock::now();
  Certificate c;
  c.level = std::max(F.level(), G.level());
  c.epsilon_requested = epsilon;
  c.value1 = profile_value(g, F, G, Player::kOne);
  c.value2 = profile_value(g, F, G, Player::kTwo);
  const BestResponseValue br1 = br_value_infinite(g, Player::kOne, G, quad_tol);
  const BestResponseValue br2 = br_value_infinite(g, Player::kTwo, F, quad_tol);
  c.gap1 = br1.value - c.value1;
  c.gap2 = br2.value - c.value2;
  c.quad_error1 = br1.error;
  c.quad_error2 = br2.error;
  c.certified = c.gap1 + c.quad_error1 <= epsilon && c.gap2 + c.quad_error2 <= epsilon;
  c.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

// Interim expected raw utility of `player` at own type theta, playing the
// action distribution `own` against an atomic opponent. Each opponent atom
// at theta_j carries weight b(theta, theta_j) / marginal(theta) * mass.
inline double interim_value(const InfiniteGame& g, Player player, double theta,
                            std::span<const double> own, const StepStrategy& opponent,
                            double quad_tol) {
  const Player q = other(player);
  detail::check_strategy(g, opponent, q);
  if (own.size() != g.num_actions(player)) {
    throw InvalidArgument("own distribution has the wrong number of actions");
  }
  const double marg = marginal(g, player, theta, quad_tol);
  if (!(marg > 0.0)) {
    throw ZeroMarginal("marginal of player " + std::to_string(number(player)) +
                       " vanishes at type " + std::to_string(theta));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(opponent.level()); ++j) {
    const double tj = opponent.atom_theta(j);
    const double t1 = player == Player::kOne ? theta : tj;
    const double t2 = player == Player::kOne ? tj : theta;
    const double weight = g.prior(t1, t2) / marg;
    double inner = 0.0;
    for (std::size_t a = 0; a < own.size(); ++a) {
      if (own[a] == 0.0) continue;
      for (std::size_t b = 0; b < opponent.num_actions(); ++b) {
        const double mass = opponent.atom_mass(j, b);
        if (mass == 0.0) continue;
        const std::size_t x = player == Player::kOne ? a : b;
        const std::size_t y = player == Player::kOne ? b : a;
        inner += own[a] * mass * g.raw_utility(player, x, y, t1, t2);
      }
    }
    total += weight * inner;
  }
  return total;
}

inline double interim_value(const InfiniteGame& g, Player player, double theta,
                            const StepStrategy& own, const StepStrategy& opponent,
                            double quad_tol) {
  detail::check_strategy(g, own, player);
  const std::vector<double> dist = own.distribution_at(theta);
  return interim_value(g, player, theta, std::span<const double>(dist), opponent,
                       quad_tol);
}

}  // namespace bnecert
