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

// bnecert command-line front end: check, discretize, solve, certify, run.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bnecert.hpp"

namespace {

using bnecert::Player;
using nlohmann::json;

json matrix_json(const bnecert::Matrix<>& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return out;
}

bnecert::SolverResult solve_with(const bnecert::InfiniteGame& g,
                                 const bnecert::FiniteGame& fg,
                                 const bnecert::RunConfig& cfg) {
  const auto plan = bnecert::plan_backend(g, cfg.backend);
  return bnecert::solve_level(g, fg, plan, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified epsilon-equilibria of two-player Bayesian games with continuous types"};
  app.require_subcommand(1);

  std::string spec_path;
  int grid_check = 101;
  unsigned threads = 1;
  int level = 1;
  std::string backend = "auto";
  std::string schedule = "linear";
  bnecert::RunConfig cfg;
  double quad_tol = 0.0;
  double fp_target = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", spec_path, "Game spec (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--grid-check", grid_check, "Validation grid size (odd, >= 11)");
    sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--backend", backend, "auto | lp | fp | enum_oracle");
    sub->add_option("--fp-max-iters", cfg.fp_max_iters, "Fictitious-play iteration cap");
    sub->add_option("--fp-target-gap", fp_target, "Fictitious-play stopping gap");
  };

  auto* check = app.add_subcommand("check", "Validate a game spec");
  add_common(check);

  auto* discretize = app.add_subcommand("discretize", "Dump the level-n payoff tensors");
  add_common(discretize);
  discretize->add_option("--level", level, "Discretization level n")->required();

  auto* solve = app.add_subcommand("solve", "Solve the level-n finite game");
  add_common(solve);
  add_solver(solve);
  solve->add_option("--level", level, "Discretization level n")->required();

  auto* certify = app.add_subcommand("certify", "Solve, lift and certify at one level");
  add_common(certify);
  add_solver(certify);
  certify->add_option("--level", level, "Discretization level n")->required();
  certify->add_option("--epsilon", cfg.epsilon, "Target epsilon")->required();
  certify->add_option("--quad-tol", quad_tol, "Quadrature tolerance (<= epsilon/10)");

  auto* run = app.add_subcommand("run", "Run the level schedule until certified");
  add_common(run);
  add_solver(run);
  run->add_option("--epsilon", cfg.epsilon, "Target epsilon")->required();
  run->add_option("--max-level", cfg.max_level, "Largest level K");
  run->add_option("--schedule", schedule, "linear | doubling");
  run->add_option("--quad-tol", quad_tol, "Quadrature tolerance (<= epsilon/10)");
  run->add_option("--output", cfg.output_path, "Report path (stdout when omitted)");
  run->add_flag("--emit-curves", cfg.emit_curves, "Write theta,action,F CSVs per level");

  CLI11_PARSE(app, argc, argv);

  try {
    bnecert::set_num_threads(threads);
    cfg.backend = bnecert::backend_from_string(backend);
    cfg.schedule = bnecert::schedule_from_string(schedule);
    if (quad_tol > 0.0) cfg.quad_tol = quad_tol;
    if (fp_target > 0.0) cfg.fp_target_gap = fp_target;

    const auto g = bnecert::load_game(bnecert::read_game_spec(spec_path), grid_check);

    if (check->parsed()) {
      std::string lp_condition;
      try {
        lp_condition = bnecert::describe(bnecert::check_prop1(g, g.grid_check()));
      } catch (const bnecert::Prop1Violation& e) {
        lp_condition = std::string("Prop1Violation: ") + e.what();
      }
      const json out = {{"actions1", g.actions(Player::kOne)},
                        {"actions2", g.actions(Player::kTwo)},
                        {"prior_norm", g.prior_norm()},
                        {"shift1", g.shift(Player::kOne)},
                        {"shift2", g.shift(Player::kTwo)},
                        {"lp_condition", lp_condition}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (discretize->parsed()) {
      const auto fg = bnecert::build_finite(g, level);
      json U = json::array(), V = json::array();
      for (std::size_t x = 0; x < fg.num_actions(Player::kOne); ++x) {
        json urow = json::array(), vrow = json::array();
        for (std::size_t y = 0; y < fg.num_actions(Player::kTwo); ++y) {
          urow.push_back(matrix_json(fg.U(x, y)));
          vrow.push_back(matrix_json(fg.V(x, y)));
        }
        U.push_back(urow);
        V.push_back(vrow);
      }
      std::cout << json{{"level", level}, {"U", U}, {"V", V}}.dump(2) << '\n';
      return 0;
    }

    if (solve->parsed()) {
      const auto fg = bnecert::build_finite(g, level);
      const auto r = solve_with(g, fg, cfg);
      std::cout << bnecert::to_json(r, true).dump(2) << '\n';
      return 0;
    }

    if (certify->parsed()) {
      const auto fg = bnecert::build_finite(g, level);
      const auto r = solve_with(g, fg, cfg);
      const auto F = bnecert::lift(r.profile, Player::kOne);
      const auto G = bnecert::lift(r.profile, Player::kTwo);
      const auto c = bnecert::certify(g, F, G, cfg.epsilon, cfg.effective_quad_tol());
      json out = {{"solver", bnecert::to_json(r)},
                  {"certificate", bnecert::to_json(c)},
                  {"strategies",
                   {bnecert::to_json(F, g.actions(Player::kOne)),
                    bnecert::to_json(G, g.actions(Player::kTwo))}}};
      std::cout << out.dump(2) << '\n';
      return c.certified ? 0 : 2;
    }

    // run
    const auto report = bnecert::run(g, cfg);
    const std::string text = bnecert::to_json(report, g).dump(2) + "\n";
    if (cfg.output_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.output_path);
      if (!out) throw bnecert::InvalidArgument("cannot write " + cfg.output_path);
      out << text;
      if (cfg.emit_curves) bnecert::write_curves(report, g, cfg.output_path);
    }
    std::cerr << "status: " << bnecert::to_string(report.status);
    if (report.certified_level) std::cerr << " at n = " << *report.certified_level;
    std::cerr << '\n';
    return bnecert::exit_code(report.status);
  } catch (const bnecert::Error& e) {
    std::cerr << "error: " << bnecert::to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
