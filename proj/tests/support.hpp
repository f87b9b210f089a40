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

// Test-side oracles. Everything here evaluates games natively in C++ from
// coefficient tables and never goes through the library's quadrature or
// solvers, so it can referee them.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "bnecert.hpp"

namespace testing_support {

// Bivariate polynomial sum c[p][q] t1^p t2^q, p + q <= 3.
struct Poly {
  std::array<std::array<double, 4>, 4> c{};

  double operator()(double t1, double t2) const {
    double acc = 0.0;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; p + q < 4; ++q) acc += c[p][q] * std::pow(t1, p) * std::pow(t2, q);
    }
    return acc;
  }

  // Exact integral over the unit square.
  double integral() const {
    double acc = 0.0;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; p + q < 4; ++q) acc += c[p][q] / ((p + 1.0) * (q + 1.0));
    }
    return acc;
  }

  std::string text() const {
    std::string out;
    char buf[64];
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; p + q < 4; ++q) {
        std::snprintf(buf, sizeof buf, "%.17g", c[p][q]);
        if (!out.empty()) out += " + ";
        out += buf;
        if (p > 0) out += "*theta1^" + std::to_string(p);
        if (q > 0) out += "*theta2^" + std::to_string(q);
      }
    }
    return out;
  }

  static Poly random(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Poly poly;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; p + q < 4; ++q) poly.c[p][q] = d(rng);
    }
    return poly;
  }

  static Poly constant(double v) {
    Poly poly;
    poly.c[0][0] = v;
    return poly;
  }
};

// A game with polynomial utilities and prior, plus its native evaluation.
struct PolyGame {
  std::size_t L = 2;
  std::size_t H = 2;
  std::vector<Poly> u;  // row-major L x H
  std::vector<Poly> v;
  Poly prior = Poly::constant(1.0);

  std::string json() const {
    auto table = [&](const std::vector<Poly>& t) {
      std::string s = "[";
      for (std::size_t x = 0; x < L; ++x) {
        s += x ? ", [" : "[";
        for (std::size_t y = 0; y < H; ++y) {
          s += y ? ", \"" : "\"";
          s += t[x * H + y].text() + "\"";
        }
        s += "]";
      }
      return s + "]";
    };
    auto labels = [](std::size_t n, const char* p) {
      std::string s = "[";
      for (std::size_t k = 0; k < n; ++k) {
        s += (k ? ", \"" : "\"") + std::string(p) + std::to_string(k + 1) + "\"";
      }
      return s + "]";
    };
    return "{\"actions1\": " + labels(L, "x") + ", \"actions2\": " + labels(H, "y") +
           ", \"u\": " + table(u) + ", \"v\": " + table(v) + ", \"prior\": \"" +
           prior.text() + "\"}";
  }

  bnecert::InfiniteGame load() const {
    return bnecert::load_game(bnecert::parse_game_spec(json()));
  }

  // Native assimilated payoff using the library's recorded shift.
  double payoff(bnecert::Player p, std::size_t x, std::size_t y, double t1, double t2,
                double shift) const {
    const Poly& f = p == bnecert::Player::kOne ? u[x * H + y] : v[x * H + y];
    return prior(t1, t2) / prior.integral() * (f(t1, t2) + shift);
  }

  static PolyGame random(std::mt19937_64& rng, std::size_t L = 2, std::size_t H = 2,
                         bool random_prior = false) {
    PolyGame g;
    g.L = L;
    g.H = H;
    for (std::size_t k = 0; k < L * H; ++k) {
      g.u.push_back(Poly::random(rng));
      g.v.push_back(Poly::random(rng));
    }
    if (random_prior) g.prior = Poly::random(rng, 0.1, 1.0);
    return g;
  }
};

// Midpoint rule with `points` cells for the best-reply integral against an
// atomic opponent given as (theta, action, mass) triples.
struct Atom {
  double theta;
  std::size_t action;
  double mass;
};

inline std::vector<Atom> atoms_of(const bnecert::StepStrategy& S) {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < static_cast<std::size_t>(S.level()); ++i) {
    for (std::size_t a = 0; a < S.num_actions(); ++a) {
      if (S.atom_mass(i, a) > 0.0) atoms.push_back({S.atom_theta(i), a, S.atom_mass(i, a)});
    }
  }
  return atoms;
}

template <typename Payoff>
double riemann_br(bnecert::Player player, std::size_t own_actions,
                  const std::vector<Atom>& opponent, Payoff payoff,
                  int points = 100000) {
  double total = 0.0;
  for (int k = 0; k < points; ++k) {
    const double theta = (k + 0.5) / points;
    double best = -INFINITY;
    for (std::size_t a = 0; a < own_actions; ++a) {
      double acc = 0.0;
      for (const Atom& atom : opponent) {
        if (player == bnecert::Player::kOne) {
          acc += atom.mass * payoff(a, atom.action, theta, atom.theta);
        } else {
          acc += atom.mass * payoff(atom.action, a, atom.theta, theta);
        }
      }
      best = std::max(best, acc);
    }
    total += best;
  }
  return total / points;
}

// Naive quadruple loop for the atomic profile value.
template <typename Payoff>
double naive_profile_value(const std::vector<Atom>& f, const std::vector<Atom>& g,
                           Payoff payoff) {
  double total = 0.0;
  for (const Atom& a : f) {
    for (const Atom& b : g) total += a.mass * b.mass * payoff(a.action, b.action, a.theta, b.theta);
  }
  return total;
}

// Random row-stochastic n x A matrix; with `sparse`, some entries are zero.
inline bnecert::Matrix<> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t A,
                                     bool sparse = false) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  bnecert::Matrix<> m(n, A);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      m(i, a) = sparse && d(rng) < 0.3 ? 0.0 : d(rng);
      sum += m(i, a);
    }
    if (sum == 0.0) {
      m(i, 0) = 1.0;
      sum = 1.0;
    }
    for (std::size_t a = 0; a < A; ++a) m(i, a) /= sum;
  }
  return m;
}

// Finite game with independent random entries in [0, 1] (or a zero-sum pair
// u + v = 1 when `zero_sum`).
inline bnecert::FiniteGame random_finite(std::mt19937_64& rng, int n, std::size_t L,
                                         std::size_t H, bool zero_sum) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const auto size = static_cast<std::size_t>(n);
  std::vector<bnecert::Matrix<>> U(L * H, bnecert::Matrix<>(size, size));
  std::vector<bnecert::Matrix<>> V(L * H, bnecert::Matrix<>(size, size));
  for (std::size_t k = 0; k < L * H; ++k) {
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t j = 0; j < size; ++j) {
        U[k](i, j) = d(rng);
        V[k](i, j) = zero_sum ? 1.0 - U[k](i, j) : d(rng);
      }
    }
  }
  return bnecert::FiniteGame(n, L, H, std::move(U), std::move(V));
}

// Brute-force ex-ante value (1/n^2) sum s t U, straight from the definition.
inline double brute_value(const bnecert::FiniteGame& fg, const bnecert::BehavioralProfile& pr,
                          bnecert::Player p) {
  const auto n = static_cast<std::size_t>(fg.level());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t x = 0; x < fg.num_actions(bnecert::Player::kOne); ++x) {
        for (std::size_t y = 0; y < fg.num_actions(bnecert::Player::kTwo); ++y) {
          total += pr.s(i, x) * pr.t(j, y) * fg.payoff(p, x, y)(i, j);
        }
      }
    }
  }
  return total / static_cast<double>(n * n);
}

// Brute-force best-reply value: per own type, the best pure action.
inline double brute_br_value(const bnecert::FiniteGame& fg, const bnecert::BehavioralProfile& pr,
                             bnecert::Player p) {
  const auto n = static_cast<std::size_t>(fg.level());
  const std::size_t own = fg.num_actions(p);
  const std::size_t opp = fg.num_actions(bnecert::other(p));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = -INFINITY;
    for (std::size_t a = 0; a < own; ++a) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t b = 0; b < opp; ++b) {
          acc += p == bnecert::Player::kOne ? pr.t(j, b) * fg.U(a, b)(i, j)
                                            : pr.s(j, b) * fg.V(b, a)(j, i);
        }
      }
      best = std::max(best, acc);
    }
    total += best;
  }
  return total / static_cast<double>(n * n);
}

}  // namespace testing_support
