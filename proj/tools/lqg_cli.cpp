// Command-line front end: solve a game for its linear equilibrium, simulate
// it, verify it statistically, or re-emit artifacts as line-delimited records.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lqgames/io.hpp"
#include "lqgames/oracles.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 3;
constexpr int kExitNotConverged = 4;
constexpr int kExitVerification = 5;
constexpr int kExitRuntime = 6;

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear equilibria of hidden-state LQG games"};
  app.require_subcommand(1);

  std::string spec_path, profile_path, out_path, in_path, dump_path;
  double damping = 0.5, tol = 1e-9;
  int max_iter = 500, threads = 1, grid_points = 16;
  long n_paths = 100000;
  std::uint64_t seed = 42;

  auto* solve = app.add_subcommand("solve", "compute the equilibrium profile");
  solve->add_option("--spec", spec_path, "game spec JSON")->required();
  solve->add_option("--out", out_path, "output artifact path")->required();
  solve->add_option("--damping", damping, "fixed-point damping in (0,1]");
  solve->add_option("--tol", tol, "coefficient sup-norm tolerance");
  solve->add_option("--max-iter", max_iter, "outer iteration cap");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rewards under a solved profile");
  simulate->add_option("--profile", profile_path, "solve artifact JSON")->required();
  simulate->add_option("--out", out_path, "output report path")->required();
  simulate->add_option("--paths", n_paths, "number of sample paths");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--threads", threads, "worker threads (0 = auto)");
  simulate->add_option("--dump-trajectories", dump_path, "optional JSONL trajectory dump");

  auto* verify = app.add_subcommand("verify", "statistical checks and deviation grid");
  verify->add_option("--profile", profile_path, "solve artifact JSON")->required();
  verify->add_option("--out", out_path, "output report path")->required();
  verify->add_option("--paths", n_paths, "paths per statistical check");
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--threads", threads, "worker threads (0 = auto)");
  verify->add_option("--deviation-grid", grid_points, "deviation points per (player, stage)");

  auto* export_cmd = app.add_subcommand("export", "re-emit an artifact as JSONL records");
  export_cmd->add_option("--in", in_path, "solve artifact JSON")->required();
  export_cmd->add_option("--out", out_path, "output records path")->required();

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (int k = 0; k < argc; ++k) command += std::string(k ? " " : "") + argv[k];

  try {
    if (solve->parsed()) {
      const lqgames::GameSpec spec = lqgames::load_spec(spec_path);
      lqgames::SolverOptions options;
      options.damping = damping;
      options.tol = tol;
      options.max_outer_iters = max_iter;
      const lqgames::Equilibrium eq = lqgames::solve_equilibrium(spec, options);
      lqgames::RunHeader header;
      header.command = command;
      header.damping = damping;
      header.tol = tol;
      header.max_iter = max_iter;
      lqgames::write_text_file(out_path,
                               lqgames::artifact_to_json(lqgames::make_artifact(header, spec, eq)));
      std::cout << "iterations=" << eq.report.iterations << " residual=" << eq.report.residual
                << " converged=" << (eq.report.converged ? "yes" : "no") << "\n";
      if (!eq.report.converged) {
        std::cerr << "error: not_converged residual=" << eq.report.residual << "\n";
        return kExitNotConverged;
      }
      return kExitOk;
    }

    if (simulate->parsed()) {
      const lqgames::SolveArtifact art = lqgames::load_artifact(profile_path);
      const lqgames::PublicRecursion rec =
          lqgames::build_public_recursion(art.spec, art.profile);
      const int nthreads = resolve_threads(threads);
      const lqgames::McReport report =
          lqgames::monte_carlo(art.spec, art.profile, rec, n_paths, seed, nthreads);
      lqgames::RunHeader header;
      header.command = command;
      header.seed = seed;
      header.n_paths = n_paths;
      header.threads = nthreads;
      lqgames::write_text_file(out_path, lqgames::mc_report_to_json(header, report));
      if (!dump_path.empty()) {
        std::ofstream dump(dump_path, std::ios::binary);
        if (!dump) throw std::runtime_error("cannot write file: " + dump_path);
        lqgames::PathSampler sampler(art.spec, seed);
        for (long p = 0; p < n_paths; ++p) {
          const lqgames::Trajectory traj =
              lqgames::rollout(art.spec, art.profile, rec, sampler.draw(p));
          dump << lqgames::trajectory_to_record(traj, p) << "\n";
        }
      }
      std::cout << "mean_total_reward=";
      for (int i = 0; i < report.mean.size(); ++i)
        std::cout << (i ? "," : "") << report.mean(i);
      std::cout << "\n";
      return kExitOk;
    }

    if (verify->parsed()) {
      const lqgames::SolveArtifact art = lqgames::load_artifact(profile_path);
      const lqgames::PublicRecursion rec =
          lqgames::build_public_recursion(art.spec, art.profile);
      const int nthreads = resolve_threads(threads);
      const lqgames::ConsistencyReport report =
          lqgames::consistency_report(art.spec, art.profile, rec, n_paths, seed, nthreads);
      const auto grid = lqgames::deviation_grid(art.spec, grid_points, seed);
      const auto gains =
          lqgames::run_deviation_grid(art.spec, art.profile, rec, grid, n_paths, seed, nthreads);
      lqgames::RunHeader header;
      header.command = command;
      header.seed = seed;
      header.n_paths = n_paths;
      header.threads = nthreads;
      header.deviation_grid = grid_points;
      lqgames::write_text_file(out_path, lqgames::verification_to_json(header, report, gains));
      std::cout << lqgames::render_report(report);
      int significant = 0;
      for (const auto& g : gains)
        if (g.significant_gain()) ++significant;
      std::cout << "deviations with significant gain: " << significant << " of " << gains.size()
                << "\n";
      if (report.failures() > 0 || significant > 0) {
        std::cerr << "error: verification_failed\n";
        return kExitVerification;
      }
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      const lqgames::SolveArtifact art = lqgames::load_artifact(in_path);
      lqgames::write_text_file(out_path, lqgames::artifact_to_records(art));
      return kExitOk;
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  } catch (const std::runtime_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    const std::string what = err.what();
    return what.find("parse error") != std::string::npos ? kExitInput : kExitRuntime;
  }
  return kExitOk;
}
