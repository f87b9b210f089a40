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

// The discretize / solve / lift / certify loop over a schedule of levels,
// plus the JSON report, curve export and convergence diagnostics.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bnecert/certify.hpp"
#include "bnecert/discretize.hpp"
#include "bnecert/enum_oracle.hpp"
#include "bnecert/error.hpp"
#include "bnecert/model.hpp"
#include "bnecert/solver.hpp"
#include "json.hpp"

namespace bnecert {

enum class Schedule { kLinear, kDoubling };
enum class BackendChoice { kAuto, kLp, kFp, kEnumOracle };

inline std::string_view to_string(Schedule s) {
  return s == Schedule::kLinear ? "linear" : "doubling";
}

inline std::string_view to_string(BackendChoice b) {
  switch (b) {
    case BackendChoice::kAuto: return "auto";
    case BackendChoice::kLp: return "lp";
    case BackendChoice::kFp: return "fp";
    case BackendChoice::kEnumOracle: return "enum_oracle";
  }
  return "?";
}

inline Schedule schedule_from_string(std::string_view s) {
  if (s == "linear") return Schedule::kLinear;
  if (s == "doubling") return Schedule::kDoubling;
  throw InvalidArgument("unknown schedule '" + std::string(s) + "'");
}

inline BackendChoice backend_from_string(std::string_view s) {
  if (s == "auto") return BackendChoice::kAuto;
  if (s == "lp") return BackendChoice::kLp;
  if (s == "fp") return BackendChoice::kFp;
  if (s == "enum_oracle" || s == "enum") return BackendChoice::kEnumOracle;
  throw InvalidArgument("unknown backend '" + std::string(s) + "'");
}

struct RunConfig {
  double epsilon = 0.05;
  int max_level = 32;
  Schedule schedule = Schedule::kLinear;
  BackendChoice backend = BackendChoice::kAuto;
  long fp_max_iters = 20000;
  std::optional<double> fp_target_gap;  // default epsilon / 10
  std::optional<double> quad_tol;       // default max(epsilon / 100, 1e-9)
  std::string output_path;
  bool emit_curves = false;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw InvalidArgument("epsilon must be > 0");
    }
    if (max_level < 1) throw InvalidArgument("max level must be >= 1");
    if (max_level > StepStrategy::kMaxLevel) {
      throw InvalidArgument("max level must be <= 4096");
    }
    if (fp_max_iters < 1) throw InvalidArgument("fp_max_iters must be >= 1");
    if (quad_tol && (!(*quad_tol > 0.0) || *quad_tol > epsilon / 10.0)) {
      throw InvalidArgument("quad_tol must be in (0, epsilon/10]");
    }
  }
  double effective_quad_tol() const {
    return quad_tol ? *quad_tol : default_quad_tol(epsilon);
  }
  double effective_fp_target() const {
    return fp_target_gap ? *fp_target_gap : epsilon / 10.0;
  }
};

// Levels visited: 1, 2, 3, ... or 1, 2, 4, ..., never above max_level.
inline std::vector<int> schedule_levels(Schedule s, int max_level) {
  std::vector<int> levels;
  for (int n = 1; n <= max_level; n = s == Schedule::kLinear ? n + 1 : 2 * n) {
    levels.push_back(n);
  }
  return levels;
}

struct LevelRecord {
  int n = 0;
  bool ok = false;
  std::string error;  // set when the level failed
  std::optional<SolverResult> solver;
  std::optional<Certificate> certificate;
  double wall_time = 0.0;
};

struct SolvedLevel {
  int n;
  StepStrategy F;
  StepStrategy G;
};

struct DiagnosticRow {
  int from = 0;
  int to = 0;
  double sup_distance1 = 0.0;
  double sup_distance2 = 0.0;
};

enum class RunStatus { kCertified, kExhausted, kFailed };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCertified: return "certified";
    case RunStatus::kExhausted: return "exhausted";
    case RunStatus::kFailed: return "failed";
  }
  return "?";
}

struct RunReport {
  RunConfig config;
  std::string prop1;
  std::vector<LevelRecord> levels;
  RunStatus status = RunStatus::kFailed;
  std::optional<int> certified_level;
  std::optional<int> best_level;
  std::vector<SolvedLevel> solved;  // lifted strategies per successful level
  std::vector<DiagnosticRow> diagnostics;
  double wall_time = 0.0;

  const SolvedLevel* winning() const {
    if (!best_level) return nullptr;
    for (const auto& s : solved) {
      if (s.n == *best_level) return &s;
    }
    return nullptr;
  }
};

inline int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::kCertified: return 0;
    case RunStatus::kExhausted: return 2;
    case RunStatus::kFailed: return 1;
  }
  return 1;
}

// max over a 1001-point grid and all actions of |F(theta) - F'(theta)|.
inline double sup_distance(const StepStrategy& a, const StepStrategy& b) {
  if (a.num_actions() != b.num_actions()) {
    throw InvalidArgument("strategies have different action counts");
  }
  double sup = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double theta = k == 1000 ? 1.0 : k / 1000.0;
    for (std::size_t x = 0; x < a.num_actions(); ++x) {
      sup = std::max(sup, std::fabs(a(x, theta) - b(x, theta)));
    }
  }
  return sup;
}

inline std::vector<DiagnosticRow> convergence_diagnostic(
    const std::vector<SolvedLevel>& solved) {
  std::vector<DiagnosticRow> rows;
  for (std::size_t k = 1; k < solved.size(); ++k) {
    rows.push_back({solved[k - 1].n, solved[k].n,
                    sup_distance(solved[k - 1].F, solved[k].F),
                    sup_distance(solved[k - 1].G, solved[k].G)});
  }
  return rows;
}

// Resolved backend plan for a run: which solver and, for the LP, why.
struct BackendPlan {
  Backend backend = Backend::kFp;
  Prop1Check check = NotDetected{};
  std::string description;
};

inline BackendPlan plan_backend(const InfiniteGame& g, BackendChoice choice) {
  BackendPlan plan;
  switch (choice) {
    case BackendChoice::kFp:
      plan.backend = Backend::kFp;
      plan.description = "not checked";
      return plan;
    case BackendChoice::kEnumOracle:
      plan.backend = Backend::kEnumOracle;
      plan.description = "not checked";
      return plan;
    case BackendChoice::kLp:
      plan.check = check_prop1(g, g.grid_check());
      if (!lp_applicable(plan.check)) {
        throw InvalidArgument(
            "lp backend needs constant-sum utilities or valid multipliers m1, m2");
      }
      plan.backend = Backend::kLp;
      plan.description = describe(plan.check);
      return plan;
    case BackendChoice::kAuto:
      try {
        plan.check = check_prop1(g, g.grid_check());
        plan.description = describe(plan.check);
      } catch (const Prop1Violation& e) {
        plan.check = NotDetected{};
        plan.description = std::string("NotDetected (") + e.what() + ")";
      }
      plan.backend = lp_applicable(plan.check) ? Backend::kLp : Backend::kFp;
      return plan;
  }
  return plan;
}

// Solves one level with the planned backend. Fictitious play that misses its
// target still returns its best iterate, marked not converged.
inline SolverResult solve_level(const InfiniteGame& g, const FiniteGame& fg,
                                const BackendPlan& plan, const RunConfig& cfg) {
  switch (plan.backend) {
    case Backend::kLp: {
      const auto [a1, a2] = lp_weights(g, plan.check, fg.level());
      return solve_lp(fg, a1, a2);
    }
    case Backend::kEnumOracle:
      return solve_enum(fg);
    case Backend::kFp:
      try {
        return solve_fp(fg, cfg.fp_max_iters, cfg.effective_fp_target());
      } catch (const NoConvergence& e) {
        return e.best();
      }
  }
  throw InvalidArgument("unknown backend");
}

inline RunReport run(const InfiniteGame& g, const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  const BackendPlan plan = plan_backend(g, cfg.backend);
  report.prop1 = plan.description;
  const double quad_tol = cfg.effective_quad_tol();

  double best_excess = std::numeric_limits<double>::infinity();
  for (int n : schedule_levels(cfg.schedule, cfg.max_level)) {
    const auto level_start = std::chrono::steady_clock::now();
    LevelRecord rec;
    rec.n = n;
    try {
      const FiniteGame fg = build_finite(g, n);
      SolverResult sr = solve_level(g, fg, plan, cfg);
      StepStrategy F = lift(sr.profile, Player::kOne);
      StepStrategy G = lift(sr.profile, Player::kTwo);
      Certificate cert = certify(g, F, G, cfg.epsilon, quad_tol);
      rec.ok = true;
      rec.solver = std::move(sr);
      rec.certificate = cert;
      report.solved.push_back({n, std::move(F), std::move(G)});
      const double excess = std::max(cert.gap1 + cert.quad_error1,
                                     cert.gap2 + cert.quad_error2);
      if (cert.certified) {
        report.certified_level = n;
        report.best_level = n;
      } else if (excess < best_excess) {
        best_excess = excess;
        report.best_level = n;
      }
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                  level_start)
                        .count();
    report.levels.push_back(std::move(rec));
    if (report.certified_level) break;
  }

  if (report.certified_level) {
    report.status = RunStatus::kCertified;
  } else if (!report.solved.empty()) {
    report.status = RunStatus::kExhausted;
  } else {
    report.status = RunStatus::kFailed;
  }
  report.diagnostics = convergence_diagnostic(report.solved);
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// --- Serialization -------------------------------------------------------

inline nlohmann::json to_json(const StepStrategy& S,
                              const std::vector<std::string>& labels) {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t i = 0; i < static_cast<std::size_t>(S.level()); ++i) {
    for (std::size_t a = 0; a < S.num_actions(); ++a) {
      const double mass = S.atom_mass(i, a);
      if (mass == 0.0) continue;
      atoms.push_back({{"theta", S.atom_theta(i)}, {"action", labels[a]}, {"mass", mass}});
    }
  }
  return {{"player", number(S.player())}, {"level", S.level()}, {"atoms", atoms}};
}

inline nlohmann::json to_json(const Certificate& c) {
  return {{"level", c.level},
          {"epsilon_requested", c.epsilon_requested},
          {"gap1", c.gap1},
          {"gap2", c.gap2},
          {"quad_error1", c.quad_error1},
          {"quad_error2", c.quad_error2},
          {"value1", c.value1},
          {"value2", c.value2},
          {"certified", c.certified},
          {"wall_time", c.wall_time}};
}

inline nlohmann::json to_json(const SolverResult& r, bool with_profile = false) {
  nlohmann::json j = {{"backend", to_string(r.backend)},
                      {"finite_gaps", {r.finite_gap1, r.finite_gap2}},
                      {"values", {r.value1, r.value2}},
                      {"iterations", r.iterations},
                      {"objective", r.objective},
                      {"converged", r.converged},
                      {"note", r.note}};
  if (with_profile) {
    auto rows = [](const Matrix<>& m) {
      nlohmann::json out = nlohmann::json::array();
      for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        out.push_back(std::vector<double>(row.begin(), row.end()));
      }
      return out;
    };
    j["profile"] = {{"s", rows(r.profile.s)}, {"t", rows(r.profile.t)}};
  }
  return j;
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"epsilon", c.epsilon},
          {"max_level", c.max_level},
          {"schedule", to_string(c.schedule)},
          {"backend", to_string(c.backend)},
          {"fp_max_iters", c.fp_max_iters},
          {"fp_target_gap", c.effective_fp_target()},
          {"quad_tol", c.effective_quad_tol()},
          {"emit_curves", c.emit_curves}};
}

inline nlohmann::json to_json(const RunReport& r, const InfiniteGame& g) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& rec : r.levels) {
    nlohmann::json j = {{"n", rec.n}, {"ok", rec.ok}};
    if (rec.solver) {
      j["backend"] = to_string(rec.solver->backend);
      j["finite_gaps"] = {rec.solver->finite_gap1, rec.solver->finite_gap2};
      j["solver"] = to_json(*rec.solver);
    }
    if (rec.certificate) j["certificate"] = to_json(*rec.certificate);
    if (!rec.ok) j["error"] = rec.error;
    j["wall_time"] = rec.wall_time;
    levels.push_back(std::move(j));
  }
  nlohmann::json strategies = nlohmann::json::array();
  if (const SolvedLevel* w = r.winning()) {
    strategies.push_back(to_json(w->F, g.actions(Player::kOne)));
    strategies.push_back(to_json(w->G, g.actions(Player::kTwo)));
  }
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& d : r.diagnostics) {
    diag.push_back({{"from", d.from},
                    {"to", d.to},
                    {"sup_distance1", d.sup_distance1},
                    {"sup_distance2", d.sup_distance2}});
  }
  nlohmann::json out = {
      {"config", to_json(r.config)},
      {"game",
       {{"actions1", g.actions(Player::kOne)},
        {"actions2", g.actions(Player::kTwo)},
        {"prior_norm", g.prior_norm()},
        {"shift1", g.shift(Player::kOne)},
        {"shift2", g.shift(Player::kTwo)}}},
      {"lp_condition", r.prop1},
      {"levels", levels},
      {"status", to_string(r.status)},
      {"certified_level", r.certified_level ? nlohmann::json(*r.certified_level)
                                            : nlohmann::json(nullptr)},
      {"best_level",
       r.best_level ? nlohmann::json(*r.best_level) : nlohmann::json(nullptr)},
      {"strategies", strategies},
      {"diagnostics", diag},
      {"wall_time", r.wall_time}};
  return out;
}

// Removes every "wall_time" key, recursively.
inline nlohmann::json strip_timing(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("wall_time");
    for (auto& [key, value] : j.items()) value = strip_timing(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timing(value);
  }
  return j;
}

// CSV "theta,action,F" at 1001 points.
inline void write_curve(std::ostream& out, const StepStrategy& S,
                        const std::vector<std::string>& labels) {
  out << "theta,action,F\n";
  char buf[64];
  for (int k = 0; k <= 1000; ++k) {
    const double theta = k == 1000 ? 1.0 : k / 1000.0;
    for (std::size_t a = 0; a < S.num_actions(); ++a) {
      std::snprintf(buf, sizeof buf, "%.3f", theta);
      out << buf << ',' << labels[a] << ',';
      std::snprintf(buf, sizeof buf, "%.17g", S(a, theta));
      out << buf << '\n';
    }
  }
}

// Writes <stem>_n<level>_p<player>.csv next to the report for every solved
// level; returns the paths written.
inline std::vector<std::filesystem::path> write_curves(const RunReport& r,
                                                       const InfiniteGame& g,
                                                       const std::filesystem::path& report) {
  std::vector<std::filesystem::path> paths;
  const auto dir = report.parent_path();
  const auto stem = report.stem().string();
  for (const auto& s : r.solved) {
    for (const StepStrategy* S : {&s.F, &s.G}) {
      const auto path = dir / (stem + "_n" + std::to_string(s.n) + "_p" +
                               std::to_string(number(S->player())) + ".csv");
      std::ofstream out(path);
      if (!out) throw InvalidArgument("cannot write " + path.string());
      write_curve(out, *S, g.actions(S->player()));
      paths.push_back(path);
    }
  }
  return paths;
}

}  // namespace bnecert
