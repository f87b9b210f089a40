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

// Continuous-type two-player Bayesian games: spec loading, validation,
// prior normalization, the nonnegativity shift, and prior assimilation
// (payoff = prior density * shifted utility).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bnecert/error.hpp"
#include "bnecert/expr.hpp"
#include "bnecert/quadrature.hpp"
#include "json.hpp"

namespace bnecert {

enum class Player { kOne = 1, kTwo = 2 };

inline Player other(Player p) {
  return p == Player::kOne ? Player::kTwo : Player::kOne;
}
inline int number(Player p) { return static_cast<int>(p); }
inline Player player_from_number(int i) {
  if (i != 1 && i != 2) throw InvalidArgument("player must be 1 or 2");
  return static_cast<Player>(i);
}

// Declared type interval; types are rescaled affinely onto [0, 1].
struct TypeRange {
  double lo = 0.0;
  double hi = 1.0;
  double to_declared(double unit) const { return lo + (hi - lo) * unit; }
};

// A game as written by the user: labels, raw utilities and an (unnormalized)
// prior density, all in declared type coordinates.
struct GameSpec {
  std::vector<std::string> actions1;
  std::vector<std::string> actions2;
  std::vector<expr::Expr> u_raw;  // row-major, actions1 x actions2
  std::vector<expr::Expr> v_raw;
  expr::Expr prior;
  std::optional<expr::Expr> m1;
  std::optional<expr::Expr> m2;
  TypeRange type_range1;
  TypeRange type_range2;

  void validate() const {
    if (actions1.empty() || actions2.empty()) {
      throw SpecError("each player needs at least one action");
    }
    auto unique = [](const std::vector<std::string>& labels, const char* who) {
      std::set<std::string> seen(labels.begin(), labels.end());
      if (seen.size() != labels.size()) {
        throw SpecError(std::string("duplicate action label for ") + who);
      }
    };
    unique(actions1, "player 1");
    unique(actions2, "player 2");
    const std::size_t cells = actions1.size() * actions2.size();
    if (u_raw.size() != cells || v_raw.size() != cells) {
      throw SpecError("u and v need one expression per action pair");
    }
    for (const TypeRange& r : {type_range1, type_range2}) {
      if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.hi > r.lo)) {
        throw SpecError("type range must satisfy lo < hi");
      }
    }
    if (m1 && m1->uses_theta2()) throw SpecError("m1 may only use theta1");
    if (m2 && m2->uses_theta1()) throw SpecError("m2 may only use theta2");
  }
};

namespace detail {

inline expr::Expr parse_field(const nlohmann::json& j, const std::string& where) {
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_number()) {
    text = j.dump();
  } else {
    throw SpecError(where + ": expected an expression string");
  }
  try {
    return expr::parse(text);
  } catch (const SyntaxError& e) {
    throw SyntaxError(e.offset(), where + ": " + text);
  } catch (const UnknownIdentifier& e) {
    throw UnknownIdentifier(where + ": " + e.what());
  }
}

inline std::vector<expr::Expr> parse_table(const nlohmann::json& root,
                                           const char* key, std::size_t rows,
                                           std::size_t cols) {
  if (!root.contains(key)) throw SpecError(std::string("missing field '") + key + "'");
  const auto& table = root.at(key);
  if (!table.is_array() || table.size() != rows) {
    throw SpecError(std::string("'") + key + "' must have one row per action of player 1");
  }
  std::vector<expr::Expr> out;
  out.reserve(rows * cols);
  for (std::size_t x = 0; x < rows; ++x) {
    const auto& row = table.at(x);
    if (!row.is_array() || row.size() != cols) {
      throw SpecError(std::string("'") + key + "' rows must have one entry per action of player 2");
    }
    for (std::size_t y = 0; y < cols; ++y) {
      out.push_back(parse_field(row.at(y), std::string(key) + "[" +
                                               std::to_string(x) + "][" +
                                               std::to_string(y) + "]"));
    }
  }
  return out;
}

inline std::vector<std::string> parse_labels(const nlohmann::json& root,
                                             const char* key) {
  if (!root.contains(key) || !root.at(key).is_array()) {
    throw SpecError(std::string("missing array field '") + key + "'");
  }
  std::vector<std::string> labels;
  for (const auto& item : root.at(key)) {
    if (!item.is_string()) throw SpecError(std::string(key) + " entries must be strings");
    labels.push_back(item.get<std::string>());
  }
  return labels;
}

inline TypeRange parse_range(const nlohmann::json& root, const char* key) {
  if (!root.contains(key)) return {};
  const auto& r = root.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw SpecError(std::string("'") + key + "' must be [lo, hi]");
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

}  // namespace detail

inline GameSpec game_spec_from_json(const nlohmann::json& root) {
  if (!root.is_object()) throw SpecError("game spec must be a JSON object");
  GameSpec spec;
  spec.actions1 = detail::parse_labels(root, "actions1");
  spec.actions2 = detail::parse_labels(root, "actions2");
  spec.u_raw = detail::parse_table(root, "u", spec.actions1.size(),
                                   spec.actions2.size());
  spec.v_raw = detail::parse_table(root, "v", spec.actions1.size(),
                                   spec.actions2.size());
  if (!root.contains("prior")) throw SpecError("missing field 'prior'");
  spec.prior = detail::parse_field(root.at("prior"), "prior");
  if (root.contains("m1")) spec.m1 = detail::parse_field(root.at("m1"), "m1");
  if (root.contains("m2")) spec.m2 = detail::parse_field(root.at("m2"), "m2");
  spec.type_range1 = detail::parse_range(root, "type_range1");
  spec.type_range2 = detail::parse_range(root, "type_range2");
  spec.validate();
  return spec;
}

inline GameSpec parse_game_spec(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("invalid JSON: ") + e.what());
  }
  return game_spec_from_json(root);
}

inline GameSpec read_game_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open game spec " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_game_spec(text);
}

class InfiniteGame;
inline InfiniteGame load_game(GameSpec spec, int grid_check = 101);

// A validated game on [0,1]^2 with normalized prior b and assimilated
// payoffs u = b * (u_raw + shift1), v = b * (v_raw + shift2).
// Immutable; all members are safe to call concurrently.
class InfiniteGame {
 public:
  std::size_t num_actions(Player p) const {
    return p == Player::kOne ? spec_.actions1.size() : spec_.actions2.size();
  }
  const std::vector<std::string>& actions(Player p) const {
    return p == Player::kOne ? spec_.actions1 : spec_.actions2;
  }
  const GameSpec& spec() const noexcept { return spec_; }

  double prior_norm() const noexcept { return prior_norm_; }
  double shift(Player p) const noexcept {
    return p == Player::kOne ? shift1_ : shift2_;
  }
  int grid_check() const noexcept { return grid_check_; }

  double prior_unnormalized(double t1, double t2) const {
    return spec_.prior(spec_.type_range1.to_declared(t1),
                       spec_.type_range2.to_declared(t2));
  }
  double prior(double t1, double t2) const {
    return prior_unnormalized(t1, t2) / prior_norm_;
  }

  // Utilities as written by the user (no shift, no prior).
  double raw_utility(Player p, std::size_t x, std::size_t y, double t1,
                     double t2) const {
    const auto& table = p == Player::kOne ? spec_.u_raw : spec_.v_raw;
    return table[x * spec_.actions2.size() + y](
        spec_.type_range1.to_declared(t1), spec_.type_range2.to_declared(t2));
  }
  double shifted_utility(Player p, std::size_t x, std::size_t y, double t1,
                         double t2) const {
    return raw_utility(p, x, y, t1, t2) + shift(p);
  }
  // Assimilated payoff u^{x,y} (player 1) or v^{x,y} (player 2).
  double payoff(Player p, std::size_t x, std::size_t y, double t1,
                double t2) const {
    return prior(t1, t2) * shifted_utility(p, x, y, t1, t2);
  }

  bool has_multipliers() const noexcept {
    return spec_.m1.has_value() && spec_.m2.has_value();
  }
  // User-supplied LP multiplier m_i at own type theta (unit coordinates).
  double multiplier(Player p, double theta) const {
    if (p == Player::kOne) {
      return (*spec_.m1)(spec_.type_range1.to_declared(theta), 0.0);
    }
    return (*spec_.m2)(0.0, spec_.type_range2.to_declared(theta));
  }

 private:
  friend InfiniteGame load_game(GameSpec spec, int grid_check);
  explicit InfiniteGame(GameSpec spec) : spec_(std::move(spec)) {}

  GameSpec spec_;
  double prior_norm_ = 1.0;
  double shift1_ = 0.0;
  double shift2_ = 0.0;
  int grid_check_ = 101;
};

// b_i(theta): the prior integrated over the other player's type.
inline double marginal(const InfiniteGame& g, Player p, double theta,
                       double quad_tol) {
  auto slice = [&](double other) {
    return p == Player::kOne ? g.prior(theta, other) : g.prior(other, theta);
  };
  return integrate(slice, 0.0, 1.0, quad_tol).value;
}

// b_i(theta_other | theta_own) = b / marginal.
inline double conditional(const InfiniteGame& g, Player p, double theta_other,
                          double theta_own, double quad_tol) {
  const double m = marginal(g, p, theta_own, quad_tol);
  if (!(m > 0.0)) {
    throw ZeroMarginal("marginal of player " + std::to_string(number(p)) +
                       " vanishes at type " + std::to_string(theta_own));
  }
  const double joint = p == Player::kOne ? g.prior(theta_own, theta_other)
                                         : g.prior(theta_other, theta_own);
  return joint / m;
}

inline constexpr double kShiftMargin = 1e-9;

// Validates the spec on a grid_check x grid_check grid, normalizes the
// prior, and fixes the nonnegativity shifts.
inline InfiniteGame load_game(GameSpec spec, int grid_check) {
  if (grid_check < 11 || grid_check % 2 == 0) {
    throw InvalidArgument("validation grid must be odd and >= 11");
  }
  spec.validate();
  InfiniteGame g(std::move(spec));
  g.grid_check_ = grid_check;
  const auto& s = g.spec_;
  const std::size_t L = s.actions1.size();
  const std::size_t H = s.actions2.size();
  const double step = 1.0 / (grid_check - 1);
  auto grid = [&](int k) { return k == grid_check - 1 ? 1.0 : k * step; };

  double prior_sum = 0.0;
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid_check; ++a) {
    for (int c = 0; c < grid_check; ++c) {
      const double t1 = grid(a);
      const double t2 = grid(c);
      const double b = g.prior_unnormalized(t1, t2);
      if (!std::isfinite(b)) {
        throw NonFinite("prior is not finite at (" + std::to_string(t1) + ", " +
                        std::to_string(t2) + ")");
      }
      if (b < 0.0) {
        throw NegativePrior("prior is negative at (" + std::to_string(t1) +
                            ", " + std::to_string(t2) + ")");
      }
      prior_sum += b;
      for (std::size_t x = 0; x < L; ++x) {
        for (std::size_t y = 0; y < H; ++y) {
          const double u = g.raw_utility(Player::kOne, x, y, t1, t2);
          const double v = g.raw_utility(Player::kTwo, x, y, t1, t2);
          if (!std::isfinite(u) || !std::isfinite(v)) {
            throw NonFinite("utility for action pair (" + std::to_string(x) +
                            ", " + std::to_string(y) + ") is not finite at (" +
                            std::to_string(t1) + ", " + std::to_string(t2) + ")");
          }
          min_u = std::min(min_u, u);
          min_v = std::min(min_v, v);
        }
      }
    }
  }
  const double scale = prior_sum / (static_cast<double>(grid_check) * grid_check);
  if (!(scale > 0.0)) throw ZeroMarginal("prior vanishes on the whole grid");

  auto raw_prior = [&](double t1, double t2) { return g.prior_unnormalized(t1, t2); };
  g.prior_norm_ = integrate_unit_square(raw_prior, 1e-11 * scale).value;
  if (!(g.prior_norm_ > 0.0)) throw ZeroMarginal("prior integrates to zero");

  for (Player p : {Player::kOne, Player::kTwo}) {
    for (int k = 0; k < grid_check; ++k) {
      const double m = marginal(g, p, grid(k), 1e-10);
      if (!(m > 0.0)) {
        throw ZeroMarginal("marginal of player " + std::to_string(number(p)) +
                           " vanishes at type " + std::to_string(grid(k)));
      }
    }
  }

  g.shift1_ = std::max(0.0, -min_u) + kShiftMargin;
  g.shift2_ = std::max(0.0, -min_v) + kShiftMargin;
  return g;
}

}  // namespace bnecert
