#ifndef LQGAMES_VERIFY_HPP
#define LQGAMES_VERIFY_HPP

#include <string>
#include <vector>

#include "lqgames/simulate.hpp"

namespace lqgames {

// A single unilateral deviation: either a perturbation of the stage
// coefficients or a fixed action override at one (player, stage).
struct DeviationSpec {
  enum class Kind { coeff, fixed_action };
  int player = 0;
  int stage = 0;
  Kind kind = Kind::coeff;
  MatrixXd d_l;      // dim_a x dim_v
  MatrixXd d_m;      // dim_a x f_stack
  VectorXd d_c;      // dim_a
  VectorXd action;   // fixed override (kind == fixed_action)
  std::string label;
};

struct GainEstimate {
  DeviationSpec dev;
  double gain = 0.0;     // mean total-reward change of the deviating player
  double std_err = 0.0;  // paired standard error (common random numbers)
  long n_paths = 0;
  bool significant_gain() const { return gain > 3.0 * std_err; }
};

// Estimates the deviator's expected gain with common random numbers: both
// arms of every path share the same hidden state and noise draws. The
// deviator's own filter is unaffected by her action; everyone else processes
// it through the usual affine updates.
GainEstimate deviation_gain(const GameSpec& spec, const StrategyProfile& profile,
                            const PublicRecursion& rec, const DeviationSpec& dev, long n_paths,
                            std::uint64_t seed, int threads = 1);

// The certification grid: per (player, stage), `points` deviations made of
// coefficient perturbations at magnitudes 1e-2 and 1e-1 in reproducible
// random directions plus two fixed-action overrides.
std::vector<DeviationSpec> deviation_grid(const GameSpec& spec, int points, std::uint64_t seed);

std::vector<GainEstimate> run_deviation_grid(const GameSpec& spec, const StrategyProfile& profile,
                                             const PublicRecursion& rec,
                                             const std::vector<DeviationSpec>& grid, long n_paths,
                                             std::uint64_t seed, int threads = 1);

struct ConsistencyEntry {
  std::string claim;
  double statistic = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool insufficient_samples = false;
  long n = 0;
};

struct ConsistencyReport {
  std::vector<ConsistencyEntry> entries;
  long n_paths = 0;
  std::uint64_t seed = 0;
  bool all_pass() const;
  int failures() const;
};

// Statistical checks of the filter claims on simulated paths: zero-mean
// cross-estimate residuals and their regression form, martingale and white
// private-estimate innovations, zero on-path own-action innovations,
// conditional covariances against the recursion, offset publicness, and a
// small exact filter-versus-oracle comparison. Entries with too few samples
// are flagged as insufficient rather than failed.
ConsistencyReport consistency_report(const GameSpec& spec, const StrategyProfile& profile,
                                     const PublicRecursion& rec, long n_paths, std::uint64_t seed,
                                     int threads = 1);

std::string render_report(const ConsistencyReport& report);

}  // namespace lqgames

#endif
