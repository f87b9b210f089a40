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

#include <gtest/gtest.h>

#include <random>

#include "bnecert.hpp"
#include "support.hpp"

namespace {

using bnecert::Matrix;
using bnecert::Player;
using bnecert::StepStrategy;
using testing_support::PolyGame;

bnecert::InfiniteGame load(const std::string& json) {
  return bnecert::load_game(bnecert::parse_game_spec(json));
}

const char* kMatchingZeroSum = R"({"actions1": ["a", "b"], "actions2": ["a", "b"],
    "u": [["theta1*theta2", "0"], ["0", "theta1*theta2"]],
    "v": [["-theta1*theta2", "0"], ["0", "-theta1*theta2"]], "prior": "1"})";

TEST(ProfileValue, SingleAtom) {
  const auto g = load(R"({"actions1": ["x"], "actions2": ["y"], "u": [["theta1*theta2"]],
      "v": [["0"]], "prior": "1"})");
  const StepStrategy F(Player::kOne, Matrix<>{{1}});
  const StepStrategy G(Player::kTwo, Matrix<>{{1}});
  EXPECT_NEAR(bnecert::profile_value(g, F, G, Player::kOne), 1.0, 1e-8);
}

TEST(ProfileValue, ConstantUtilityAveragesPriorOverAtoms) {
  const auto g = load(R"({"actions1": ["x"], "actions2": ["y"], "u": [["3"]],
      "v": [["0"]], "prior": "1 + theta1*theta2"})");
  const int n = 4;
  const StepStrategy F(Player::kOne, Matrix<>(n, 1, 1.0));
  const StepStrategy G(Player::kTwo, Matrix<>(n, 1, 1.0));
  double avg = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) avg += g.prior(i / 4.0, j / 4.0) / (n * n);
  }
  EXPECT_NEAR(bnecert::profile_value(g, F, G, Player::kOne), (3 + 1e-9) * avg, 1e-12);
}

TEST(ProfileValue, MatchesNaiveLoopAcrossLevels) {
  std::mt19937_64 rng(2);
  const auto pg = PolyGame::random(rng, 2, 3, true);
  const auto g = pg.load();
  for (auto [n1, n2] : {std::pair{2, 2}, std::pair{3, 5}, std::pair{1, 8}}) {
    const StepStrategy F(Player::kOne, testing_support::random_rows(rng, n1, 2));
    const StepStrategy G(Player::kTwo, testing_support::random_rows(rng, n2, 3));
    for (Player p : {Player::kOne, Player::kTwo}) {
      const double naive = testing_support::naive_profile_value(
          testing_support::atoms_of(F), testing_support::atoms_of(G),
          [&](std::size_t x, std::size_t y, double t1, double t2) {
            return pg.payoff(p, x, y, t1, t2, g.shift(p));
          });
      EXPECT_NEAR(bnecert::profile_value(g, F, G, p), naive, 1e-12);
    }
  }
}

TEST(ProfileValue, EqualsFiniteGameValue) {
  const auto g = load(kMatchingZeroSum);
  std::mt19937_64 rng(6);
  const int n = 5;
  const bnecert::BehavioralProfile pr{testing_support::random_rows(rng, n, 2),
                                      testing_support::random_rows(rng, n, 2)};
  const auto fg = bnecert::build_finite(g, n);
  const auto F = bnecert::lift(pr, Player::kOne);
  const auto G = bnecert::lift(pr, Player::kTwo);
  EXPECT_NEAR(bnecert::profile_value(g, F, G, Player::kOne),
              bnecert::ex_ante_value(fg, pr, Player::kOne), 1e-12);
}

TEST(BrValue, MaxOfLineAndMirror) {
  const auto g = load(R"({"actions1": ["x1", "x2"], "actions2": ["y1"],
      "u": [["theta1*theta2"], ["1 - theta1"]], "v": [["0"], ["0"]], "prior": "1"})");
  const StepStrategy G(Player::kTwo, Matrix<>{{1}});
  const auto br = bnecert::br_value_infinite(g, Player::kOne, G, 1e-8);
  EXPECT_NEAR(br.value, 0.75, 1e-8);
  EXPECT_LE(br.error, 1e-8);
}

TEST(BrValue, SingleOwnActionAgainstUniformAtoms) {
  const auto g = load(R"({"actions1": ["x"], "actions2": ["y"], "u": [["theta1*theta2"]],
      "v": [["0"]], "prior": "1"})");
  const StepStrategy G(Player::kTwo, Matrix<>{{1}, {1}});
  EXPECT_NEAR(bnecert::br_value_infinite(g, Player::kOne, G, 1e-10).value, 0.375, 1e-8);
}

TEST(BrValue, RandomPolynomialGamesMatchRiemann) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pg = PolyGame::random(rng, 2 + trial % 2, 2, trial % 3 == 0);
    const auto g = pg.load();
    for (int n : {1, 2, 4}) {
      const StepStrategy G(Player::kTwo, testing_support::random_rows(rng, n, 2));
      const StepStrategy F(Player::kOne, testing_support::random_rows(rng, n, pg.L));
      const double tol = 1e-8;
      const auto br1 = bnecert::br_value_infinite(g, Player::kOne, G, tol);
      const auto br2 = bnecert::br_value_infinite(g, Player::kTwo, F, tol);
      auto payoff = [&](Player p) {
        return [&, p](std::size_t x, std::size_t y, double t1, double t2) {
          return pg.payoff(p, x, y, t1, t2, g.shift(p));
        };
      };
      const double ref1 = testing_support::riemann_br(Player::kOne, pg.L,
                                                      testing_support::atoms_of(G),
                                                      payoff(Player::kOne), 20000);
      const double ref2 = testing_support::riemann_br(Player::kTwo, 2,
                                                      testing_support::atoms_of(F),
                                                      payoff(Player::kTwo), 20000);
      EXPECT_NEAR(br1.value, ref1, std::max(tol, 1e-6)) << "trial " << trial << " n " << n;
      EXPECT_NEAR(br2.value, ref2, std::max(tol, 1e-6)) << "trial " << trial << " n " << n;
    }
  }
}

TEST(BrValue, ThreadCountIndependent) {
  std::mt19937_64 rng(15);
  const auto g = PolyGame::random(rng, 3, 3, true).load();
  const StepStrategy G(Player::kTwo, testing_support::random_rows(rng, 16, 3));
  const auto a = bnecert::br_value_infinite(g, Player::kOne, G, 1e-9);
  bnecert::set_num_threads(4);
  const auto b = bnecert::br_value_infinite(g, Player::kOne, G, 1e-9);
  bnecert::set_num_threads(1);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error, b.error);
}

TEST(Certify, SingleActionGame) {
  const auto g = load(R"({"actions1": ["x"], "actions2": ["y"], "u": [["theta1 + theta2"]],
      "v": [["theta1*theta2"]], "prior": "1"})");
  // With a single action the atomic profile still sits on the right end of
  // each cell, so the gap is the grid bias of that sum, not zero. Equal
  // levels on both sides and a uniform grid keep it small.
  const StepStrategy F(Player::kOne, Matrix<>(64, 1, 1.0));
  const StepStrategy G(Player::kTwo, Matrix<>(64, 1, 1.0));
  const auto c = bnecert::certify(g, F, G, 0.05, 1e-6);
  EXPECT_TRUE(c.certified);
  EXPECT_LE(std::fabs(c.gap1), 0.02);
}

TEST(Certify, ConstantUtilitiesAreIndifferent) {
  const auto g = load(R"({"actions1": ["x1", "x2"], "actions2": ["y1", "y2"],
      "u": [["1", "1"], ["1", "1"]], "v": [["1", "1"], ["1", "1"]], "prior": "1"})");
  std::mt19937_64 rng(3);
  for (int n : {1, 3, 7}) {
    const StepStrategy F(Player::kOne, testing_support::random_rows(rng, n, 2));
    const StepStrategy G(Player::kTwo, testing_support::random_rows(rng, n, 2));
    const auto c = bnecert::certify(g, F, G, 0.01, 1e-4);
    EXPECT_TRUE(c.certified);
    EXPECT_LE(std::fabs(c.gap1), 1e-4);
    EXPECT_LE(std::fabs(c.gap2), 1e-4);
  }
}

TEST(Certify, EnforcesToleranceRatio) {
  const auto g = load(kMatchingZeroSum);
  const StepStrategy F(Player::kOne, Matrix<>{{1, 0}});
  const StepStrategy G(Player::kTwo, Matrix<>{{1, 0}});
  EXPECT_THROW(bnecert::certify(g, F, G, 0.05, 0.01), bnecert::InvalidArgument);
  EXPECT_THROW(bnecert::certify(g, F, G, 0.0, 1e-6), bnecert::InvalidArgument);
  EXPECT_THROW(bnecert::certify(g, G, F, 0.05, 1e-3), bnecert::InvalidArgument);
}

// The certificate inequality is exactly gap + error <= epsilon per player.
TEST(Certify, DecisionRule) {
  const auto g = load(kMatchingZeroSum);
  for (int n = 1; n <= 8; ++n) {
    const auto fg = bnecert::build_finite(g, n);
    const auto alpha = bnecert::uniform_alpha(n);
    const auto r = bnecert::solve_lp(fg, alpha, alpha);
    const auto c = bnecert::certify(g, bnecert::lift(r.profile, Player::kOne),
                                    bnecert::lift(r.profile, Player::kTwo), 0.05, 1e-7);
    EXPECT_EQ(c.certified, c.gap1 + c.quad_error1 <= 0.05 && c.gap2 + c.quad_error2 <= 0.05);
  }
}

// Closed form for the matching game u = t1 t2 [x = y], v = -u, at the LP
// equilibrium: player 2's gap is (n+1)/(8 n^2) * ... evaluated as the
// difference between the continuous best reply and the right-end atom sum.
// Player 1's gap is negative: the atoms overweight high types.
TEST(Certify, GridBiasOnMatchingGame) {
  const auto g = load(kMatchingZeroSum);
  for (int n : {1, 2, 4, 8, 16}) {
    const auto fg = bnecert::build_finite(g, n);
    const auto alpha = bnecert::uniform_alpha(n);
    const auto r = bnecert::solve_lp(fg, alpha, alpha);
    const auto F = bnecert::lift(r.profile, Player::kOne);
    const auto G = bnecert::lift(r.profile, Player::kTwo);
    const auto c = bnecert::certify(g, F, G, 0.5, 1e-9);
    // Oracle: Riemann best replies and the naive atom sum.
    for (Player p : {Player::kOne, Player::kTwo}) {
      auto payoff = [&](std::size_t x, std::size_t y, double t1, double t2) {
        return g.payoff(p, x, y, t1, t2);
      };
      const auto& opp = p == Player::kOne ? G : F;
      const double br = testing_support::riemann_br(p, 2, testing_support::atoms_of(opp), payoff);
      const double val = testing_support::naive_profile_value(
          testing_support::atoms_of(F), testing_support::atoms_of(G), payoff);
      EXPECT_NEAR(c.gap(p), br - val, 1e-6) << "n " << n;
    }
    EXPECT_LT(c.gap1, 0.0);
    EXPECT_GT(c.gap2, 0.0);
    // Both shrink like 1/n.
    EXPECT_LE(c.gap2, 0.7 / n);
  }
}

// A finer quadrature never turns a certified pair into one that misses by
// more than the old error allowance.
TEST(Certify, ShrinkingToleranceIsConservative) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = PolyGame::random(rng, 2, 2).load();
    const int n = 2 + trial % 4;
    const StepStrategy F(Player::kOne, testing_support::random_rows(rng, n, 2));
    const StepStrategy G(Player::kTwo, testing_support::random_rows(rng, n, 2));
    const auto coarse = bnecert::certify(g, F, G, 0.5, 1e-3);
    const auto fine = bnecert::certify(g, F, G, 0.5, 1e-9);
    for (Player p : {Player::kOne, Player::kTwo}) {
      EXPECT_LE(fine.gap(p) + fine.quad_error(p),
                coarse.gap(p) + coarse.quad_error(p) + coarse.quad_error(p) + 1e-12);
      EXPECT_NEAR(fine.gap(p), coarse.gap(p), coarse.quad_error(p) + 1e-9);
    }
    if (coarse.certified) {
      EXPECT_TRUE(fine.certified);
    }
  }
}

TEST(Certify, PriorScalingLeavesCertificateUnchanged) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    auto pg = PolyGame::random(rng, 2, 2, true);
    const auto g = pg.load();
    for (auto& c : pg.prior.c) {
      for (auto& v : c) v *= 7.0;
    }
    const auto g7 = pg.load();
    const int n = 3 + trial;
    const StepStrategy F(Player::kOne, testing_support::random_rows(rng, n, 2));
    const StepStrategy G(Player::kTwo, testing_support::random_rows(rng, n, 2));
    const auto a = bnecert::certify(g, F, G, 0.05, 1e-7);
    const auto b = bnecert::certify(g7, F, G, 0.05, 1e-7);
    EXPECT_EQ(a.certified, b.certified);
    EXPECT_NEAR(a.value1, b.value1, 1e-12 * std::fabs(a.value1));
    EXPECT_NEAR(a.value2, b.value2, 1e-12 * std::fabs(a.value2));
  }
}

TEST(InterimValue, Examples) {
  const auto ones = load(R"({"actions1": ["x"], "actions2": ["y"], "u": [["1"]],
      "v": [["0"]], "prior": "1"})");
  const StepStrategy G1(Player::kTwo, Matrix<>{{1}, {1}});
  const std::vector<double> own{1.0};
  for (double theta : {0.0, 0.4, 1.0}) {
    EXPECT_NEAR(bnecert::interim_value(ones, Player::kOne, theta, own, G1, 1e-10), 1.0, 1e-9);
  }

  const auto linear = load(R"({"actions1": ["x"], "actions2": ["y1", "y2"],
      "u": [["theta2", "0"]], "v": [["0", "0"]], "prior": "1"})");
  const StepStrategy G(Player::kTwo, Matrix<>{{1, 0}, {1, 0}});
  for (double theta : {0.0, 0.5, 1.0}) {
    EXPECT_NEAR(bnecert::interim_value(linear, Player::kOne, theta, own, G, 1e-10), 0.75, 1e-9);
  }

  // Non-uniform prior: weight b(0, t_j) / marginal(0) * mass at each atom.
  const auto tilted = load(R"({"actions1": ["x"], "actions2": ["y1", "y2"],
      "u": [["theta2", "0"]], "v": [["0", "0"]], "prior": "theta1 + theta2"})");
  const int points = 100000;
  double marginal = 0.0;
  for (int k = 0; k < points; ++k) marginal += ((k + 0.5) / points) / points;
  const double expect = (0.5 / marginal * 0.5 * 0.5) + (1.0 / marginal * 0.5 * 1.0);
  EXPECT_NEAR(bnecert::interim_value(tilted, Player::kOne, 0.0, own, G, 1e-10), expect, 1e-6);
}

TEST(InterimValue, StepOwnStrategyUsesItsCell) {
  const auto g = load(R"({"actions1": ["x1", "x2"], "actions2": ["y"],
      "u": [["1"], ["3"]], "v": [["0"], ["0"]], "prior": "1"})");
  const StepStrategy F(Player::kOne, Matrix<>{{1, 0}, {0, 1}});
  const StepStrategy G(Player::kTwo, Matrix<>{{1}});
  EXPECT_NEAR(bnecert::interim_value(g, Player::kOne, 0.25, F, G, 1e-10), 1.0, 1e-9);
  EXPECT_NEAR(bnecert::interim_value(g, Player::kOne, 0.75, F, G, 1e-10), 3.0, 1e-9);
  EXPECT_THROW(bnecert::interim_value(g, Player::kOne, 0.75, G, G, 1e-10),
               bnecert::InvalidArgument);
}

}  // namespace
