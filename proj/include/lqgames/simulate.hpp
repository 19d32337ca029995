#ifndef LQGAMES_SIMULATE_HPP
#define LQGAMES_SIMULATE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "lqgames/recursion.hpp"
#include "lqgames/rng.hpp"

namespace lqgames {

// Omniscient per-stage record: the harness sees every player's private data.
struct StageRecord {
  MatrixXd x;     // dim_v x N signals
  MatrixXd vhat;  // dim_v x N private estimates
  VectorXd f;     // stacked public offsets
  MatrixXd a;     // dim_a x N actions
  VectorXd r;     // per-player stage rewards
};

struct Trajectory {
  VectorXd v;
  std::vector<StageRecord> stages;
  VectorXd total_rewards() const;
};

struct McReport {
  VectorXd mean;     // per-player mean total reward
  VectorXd std_err;  // sample std / sqrt(n)
  long n_paths = 0;
  std::uint64_t seed = 0;
};

// Draws V and all signal noises from counter-based streams: the same
// (seed, path) pair always reproduces the same draws, in any order.
class PathSampler {
 public:
  PathSampler(const GameSpec& spec, std::uint64_t master_seed);
  Primitives draw(std::uint64_t path_index) const;
  std::uint64_t seed() const { return master_; }

 private:
  int n_players_, horizon_;
  std::uint64_t master_;
  GaussianSampler prior_;
  std::vector<GaussianSampler> noise_;
};

// Optional action override; return true to replace the proposed action.
using ActionHook =
    std::function<bool(int player, int stage, const VectorXd& vhat, const VectorXd& f,
                       VectorXd& action)>;

// Plays one path under the profile. Every player's filter and the shared
// public offset stack run online; overridden (off-path) actions are processed
// through the same affine updates by everyone else, while the deviator's own
// filter is unaffected by her own action.
Trajectory rollout(const GameSpec& spec, const StrategyProfile& profile,
                   const PublicRecursion& rec, const Primitives& prim,
                   const ActionHook* hook = nullptr);

Trajectory sample_path(const GameSpec& spec, const StrategyProfile& profile,
                       const PublicRecursion& rec, std::uint64_t seed,
                       std::uint64_t path_index = 0);

// Independent per-path substreams; aggregation is pairwise over the path
// index, so results are identical for any thread count.
McReport monte_carlo(const GameSpec& spec, const StrategyProfile& profile,
                     const PublicRecursion& rec, long n_paths, std::uint64_t seed,
                     int threads = 1);

// Shared helper: runs fn(path_index) over [0, n) on the requested number of
// threads with a deterministic partition.
void parallel_for_paths(long n, int threads, const std::function<void(long)>& fn);

}  // namespace lqgames

#endif
