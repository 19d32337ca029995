#include "lqgames/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace lqgames {

VectorXd Trajectory::total_rewards() const {
  if (stages.empty()) return VectorXd();
  VectorXd total = VectorXd::Zero(stages.front().r.size());
  for (const auto& s : stages) total += s.r;
  return total;
}

PathSampler::PathSampler(const GameSpec& spec, std::uint64_t master_seed)
    : n_players_(spec.n_players),
      horizon_(spec.horizon),
      master_(master_seed),
      prior_(spec.prior_cov) {
  noise_.reserve(n_players_);
  for (int j = 0; j < n_players_; ++j) noise_.emplace_back(spec.noise_cov[j]);
}

Primitives PathSampler::draw(std::uint64_t path_index) const {
  Primitives prim;
  NormalStream vs(master_, path_index, 0);
  prim.v = prior_.sample(vs);
  prim.w.resize(n_players_);
  for (int j = 0; j < n_players_; ++j) {
    NormalStream ws(master_, path_index, 1 + static_cast<std::uint64_t>(j));
    prim.w[j].reserve(horizon_);
    for (int t = 0; t < horizon_; ++t) prim.w[j].push_back(noise_[j].sample(ws));
  }
  return prim;
}

Trajectory rollout(const GameSpec& spec, const StrategyProfile& profile,
                   const PublicRecursion& rec, const Primitives& prim, const ActionHook* hook) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int nv = d.dim_v;
  const int na = d.dim_a;

  Trajectory traj;
  traj.v = prim.v;
  traj.stages.resize(d.horizon);

  MatrixXd vhat(nv, n);
  VectorXd f = VectorXd::Zero(d.f_stack());
  VectorXd actions_prev;

  for (int t = 0; t < d.horizon; ++t) {
    StageRecord& rec_t = traj.stages[t];
    rec_t.x.resize(nv, n);
    for (int j = 0; j < n; ++j) rec_t.x.col(j) = prim.v + prim.w[j][t];

    if (t == 0) {
      for (int j = 0; j < n; ++j) vhat.col(j) = init_private(rec, j, rec_t.x.col(j));
    } else {
      const VectorXd f_next = update_public_f(spec, rec, profile, t, f, actions_prev);
      MatrixXd vhat_next(nv, n);
      for (int j = 0; j < n; ++j)
        vhat_next.col(j) = update_private(spec, rec, profile, j, t, vhat.col(j), f, rec_t.x.col(j),
                                          actions_prev);
      vhat = vhat_next;
      f = f_next;
    }
    rec_t.vhat = vhat;
    rec_t.f = f;

    rec_t.a.resize(na, n);
    for (int j = 0; j < n; ++j) {
      VectorXd a_j = profile.at(j, t).action(vhat.col(j), f);
      if (hook != nullptr && *hook) (*hook)(j, t, vhat.col(j), f, a_j);
      rec_t.a.col(j) = a_j;
    }
    actions_prev = Eigen::Map<const VectorXd>(rec_t.a.data(), n * na);

    rec_t.r.resize(n);
    for (int i = 0; i < n; ++i) rec_t.r(i) = reward(spec, i, prim.v, actions_prev);
  }
  return traj;
}

Trajectory sample_path(const GameSpec& spec, const StrategyProfile& profile,
                       const PublicRecursion& rec, std::uint64_t seed, std::uint64_t path_index) {
  PathSampler sampler(spec, seed);
  return rollout(spec, profile, rec, sampler.draw(path_index));
}

void parallel_for_paths(long n, int threads, const std::function<void(long)>& fn) {
  if (threads <= 1 || n < 2 * threads) {
    for (long p = 0; p < n; ++p) fn(p);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const long chunk = (n + threads - 1) / threads;
  for (int k = 0; k < threads; ++k) {
    const long lo = k * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long p = lo; p < hi; ++p) fn(p);
    });
  }
  for (auto& th : pool) th.join();
}

McReport monte_carlo(const GameSpec& spec, const StrategyProfile& profile,
                     const PublicRecursion& rec, long n_paths, std::uint64_t seed, int threads) {
  if (n_paths < 2) throw std::invalid_argument("monte_carlo requires at least 2 paths");
  const int n = spec.n_players;
  PathSampler sampler(spec, seed);
  std::vector<std::vector<double>> totals(n, std::vector<double>(n_paths));
  parallel_for_paths(n_paths, threads, [&](long p) {
    const VectorXd tot =
        rollout(spec, profile, rec, sampler.draw(static_cast<std::uint64_t>(p))).total_rewards();
    for (int i = 0; i < n; ++i) totals[i][p] = tot(i);
  });

  McReport report;
  report.mean.resize(n);
  report.std_err.resize(n);
  report.n_paths = n_paths;
  report.seed = seed;
  for (int i = 0; i < n; ++i) {
    const double mean = pairwise_sum(totals[i]) / static_cast<double>(n_paths);
    std::vector<double> sq(n_paths);
    for (long p = 0; p < n_paths; ++p) {
      const double dlt = totals[i][p] - mean;
      sq[p] = dlt * dlt;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n_paths - 1);
    report.mean(i) = mean;
    report.std_err(i) = std::sqrt(var / static_cast<double>(n_paths));
  }
  return report;
}

}  // namespace lqgames
