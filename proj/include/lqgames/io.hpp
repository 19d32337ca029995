#ifndef LQGAMES_IO_HPP
#define LQGAMES_IO_HPP

#include <cstdint>
#include <string>

#include "lqgames/simulate.hpp"
#include "lqgames/solver.hpp"
#include "lqgames/verify.hpp"

namespace lqgames {

// Game files are JSON documents with top-level keys n_players, horizon,
// dim_v, dim_a, prior_cov, noise_cov, reward_mat; matrices are row-major
// nested arrays. Parse errors carry line/column positions; the result is
// passed through validate_game.
GameSpec parse_spec(const std::string& text);
GameSpec load_spec(const std::string& path);
std::string spec_to_json(const GameSpec& spec);

// Header recorded on every artifact for reproducibility.
struct RunHeader {
  std::string command;
  std::uint64_t seed = 0;
  double damping = 0.5;
  double tol = 1e-9;
  int max_iter = 500;
  long n_paths = 0;
  int threads = 1;
  int deviation_grid = 16;
};

// Solve artifact: the spec, the profile, the public sequences, values, and
// the convergence report. Numbers are serialized as shortest round-trip
// decimal text, so a reload reproduces them bit for bit.
struct SolveArtifact {
  RunHeader header;
  GameSpec spec;
  StrategyProfile profile;
  std::vector<std::vector<MatrixXd>> sigma;    // [player][stage]
  std::vector<std::vector<MatrixXd>> cross_e;  // [player][stage]
  std::vector<std::vector<MatrixXd>> values;   // [player][stage]
  ConvergenceReport convergence;
};

std::string artifact_to_json(const SolveArtifact& artifact);
SolveArtifact artifact_from_json(const std::string& text);
SolveArtifact load_artifact(const std::string& path);

SolveArtifact make_artifact(const RunHeader& header, const GameSpec& spec, const Equilibrium& eq);

// line-delimited record stream of an artifact (one JSON object per line)
std::string artifact_to_records(const SolveArtifact& artifact);

std::string mc_report_to_json(const RunHeader& header, const McReport& report);
std::string trajectory_to_record(const Trajectory& traj, long path_index);
std::string verification_to_json(const RunHeader& header, const ConsistencyReport& report,
                                 const std::vector<GainEstimate>& gains);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lqgames

#endif
