#include "lqgames/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lqgames/oracles.hpp"

namespace lqgames {

namespace {

ActionHook make_hook(const DeviationSpec& dev) {
  return [dev](int player, int stage, const VectorXd& vhat, const VectorXd& f, VectorXd& action) {
    if (player != dev.player || stage != dev.stage) return false;
    if (dev.kind == DeviationSpec::Kind::fixed_action) {
      action = dev.action;
    } else {
      action += dev.d_l * vhat + dev.d_m * f + dev.d_c;
    }
    return true;
  };
}

double safe_ratio(double stat, double se) {
  if (se > 0.0) return std::abs(stat) / se;
  return std::abs(stat) > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(std::vector<double>& xs) {
  const long n = static_cast<long>(xs.size());
  MeanSe out;
  out.mean = pairwise_sum(xs) / static_cast<double>(n);
  std::vector<double> sq(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) {
    const double d = xs[k] - out.mean;
    sq[k] = d * d;
  }
  out.se = std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

}  // namespace

GainEstimate deviation_gain(const GameSpec& spec, const StrategyProfile& profile,
                            const PublicRecursion& rec, const DeviationSpec& dev, long n_paths,
                            std::uint64_t seed, int threads) {
  if (n_paths < 2) throw std::invalid_argument("deviation_gain requires at least 2 paths");
  PathSampler sampler(spec, seed);
  const ActionHook hook = make_hook(dev);
  std::vector<double> diffs(n_paths);
  parallel_for_paths(n_paths, threads, [&](long p) {
    const Primitives prim = sampler.draw(static_cast<std::uint64_t>(p));
    const double base = rollout(spec, profile, rec, prim).total_rewards()(dev.player);
    const double alt = rollout(spec, profile, rec, prim, &hook).total_rewards()(dev.player);
    diffs[p] = alt - base;
  });
  const MeanSe ms = mean_se(diffs);
  GainEstimate out;
  out.dev = dev;
  out.gain = ms.mean;
  out.std_err = ms.se;
  out.n_paths = n_paths;
  return out;
}

std::vector<DeviationSpec> deviation_grid(const GameSpec& spec, int points, std::uint64_t seed) {
  const Dims d = spec.dims();
  if (points < 2) throw std::invalid_argument("deviation grid needs at least 2 points");
  const int n_fixed = points >= 4 ? 2 : 0;
  const int n_coeff = points - n_fixed;
  const double mags[2] = {1e-2, 1e-1};

  std::vector<DeviationSpec> grid;
  grid.reserve(static_cast<size_t>(d.n_players) * d.horizon * points);
  for (int i = 0; i < d.n_players; ++i) {
    for (int t = 0; t < d.horizon; ++t) {
      NormalStream dirs(seed, static_cast<std::uint64_t>(i) * 1000 + t, 0xdeu);
      for (int k = 0; k < n_coeff; ++k) {
        DeviationSpec dev;
        dev.player = i;
        dev.stage = t;
        dev.kind = DeviationSpec::Kind::coeff;
        dev.d_l = MatrixXd::NullaryExpr(d.dim_a, d.dim_v, [&](Eigen::Index, Eigen::Index) {
          return dirs.next();
        });
        dev.d_m = MatrixXd::NullaryExpr(d.dim_a, d.f_stack(), [&](Eigen::Index, Eigen::Index) {
          return dirs.next();
        });
        dev.d_c = dirs.vector(d.dim_a);
        const double norm = std::sqrt(dev.d_l.squaredNorm() + dev.d_m.squaredNorm() +
                                      dev.d_c.squaredNorm());
        const double mag = mags[k % 2];
        const double s = norm > 0.0 ? mag / norm : 0.0;
        dev.d_l *= s;
        dev.d_m *= s;
        dev.d_c *= s;
        std::ostringstream lbl;
        lbl << "coeff player=" << i << " stage=" << t << " mag=" << mag << " dir=" << k / 2;
        dev.label = lbl.str();
        grid.push_back(std::move(dev));
      }
      for (int k = 0; k < n_fixed; ++k) {
        DeviationSpec dev;
        dev.player = i;
        dev.stage = t;
        dev.kind = DeviationSpec::Kind::fixed_action;
        VectorXd dir = dirs.vector(d.dim_a);
        const double nrm = dir.norm();
        if (nrm > 0.0) dir /= nrm;
        dev.action = (k == 0 ? 0.5 : -0.5) * dir;
        std::ostringstream lbl;
        lbl << "fixed-action player=" << i << " stage=" << t << " sign=" << (k == 0 ? "+" : "-");
        dev.label = lbl.str();
        grid.push_back(std::move(dev));
      }
    }
  }
  return grid;
}

std::vector<GainEstimate> run_deviation_grid(const GameSpec& spec, const StrategyProfile& profile,
                                             const PublicRecursion& rec,
                                             const std::vector<DeviationSpec>& grid, long n_paths,
                                             std::uint64_t seed, int threads) {
  std::vector<GainEstimate> out;
  out.reserve(grid.size());
  for (const auto& dev : grid)
    out.push_back(deviation_gain(spec, profile, rec, dev, n_paths, seed, threads));
  return out;
}

bool ConsistencyReport::all_pass() const { return failures() == 0; }

int ConsistencyReport::failures() const {
  int bad = 0;
  for (const auto& e : entries)
    if (!e.pass && !e.insufficient_samples) ++bad;
  return bad;
}

ConsistencyReport consistency_report(const GameSpec& spec, const StrategyProfile& profile,
                                     const PublicRecursion& rec, long n_paths, std::uint64_t seed,
                                     int threads) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int nv = d.dim_v;
  const int t_end = d.horizon;
  const long min_mean_n = 100;
  const long min_cov_n = 1000;

  PathSampler sampler(spec, seed);
  std::vector<Trajectory> paths(n_paths);
  parallel_for_paths(n_paths, threads, [&](long p) {
    paths[p] = rollout(spec, profile, rec, sampler.draw(static_cast<std::uint64_t>(p)));
  });

  ConsistencyReport report;
  report.n_paths = n_paths;
  report.seed = seed;
  std::vector<double> buf(n_paths);

  auto add_entry = [&](const std::string& claim, double stat, double tol, bool pass, long used,
                       bool insufficient) {
    report.entries.push_back(ConsistencyEntry{claim, stat, tol, pass, insufficient, used});
  };

  // exact filter-versus-oracle agreement on a handful of paths
  {
    const long n_check = std::min<long>(n_paths, 100);
    double worst = 0.0;
    bool skipped = false;
    try {
      const ConditioningOracle oracle(spec, profile);
      for (long p = 0; p < n_check; ++p) {
        const Primitives prim = sampler.draw(static_cast<std::uint64_t>(p));
        for (int i = 0; i < n; ++i)
          for (int t = 0; t < t_end; ++t)
            worst = std::max(worst, (oracle.estimate_of_v(i, t, prim) -
                                     VectorXd(paths[p].stages[t].vhat.col(i)))
                                        .cwiseAbs()
                                        .maxCoeff());
      }
    } catch (const std::invalid_argument&) {
      skipped = true;  // dimension guard
    }
    add_entry("private estimates match joint-Gaussian conditioning oracle", worst, 1e-8,
              !skipped && worst <= 1e-8, n_check, skipped);
  }

  // cross-estimate residuals have zero conditional mean
  {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int t = 0; t < t_end; ++t) {
          for (int c = 0; c < nv; ++c) {
            for (long p = 0; p < n_paths; ++p) {
              const auto& st = paths[p].stages[t];
              const VectorXd pred = rec.of(i).cross_E[t] * st.vhat.col(i) +
                                    st.f.segment(d.fb(i), d.f_own());
              buf[p] = st.vhat(c, j) - pred(d.other_rank(i, j) * nv + c);
            }
            const MeanSe ms = mean_se(buf);
            worst = std::max(worst, safe_ratio(ms.mean, ms.se));
          }
        }
      }
    }
    add_entry("cross-estimate residuals centered (tower property)", worst, 3.0, worst <= 3.0,
              n_paths, n_paths < min_mean_n);
  }

  // regression of vhat^j on vhat^i (offsets moved to the left side) recovers
  // slope E^i_t and zero intercept
  {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int t = 0; t < t_end; ++t) {
          MatrixXd x(n_paths, nv + 1);
          MatrixXd y(n_paths, nv);
          for (long p = 0; p < n_paths; ++p) {
            const auto& st = paths[p].stages[t];
            x.row(p).head(nv) = st.vhat.col(i).transpose();
            x(p, nv) = 1.0;
            y.row(p) = (st.vhat.col(j) -
                        st.f.segment(d.fb_slot(i, j), nv))
                           .transpose();
          }
          const MatrixXd xtx = x.transpose() * x;
          const MatrixXd xtx_inv = xtx.ldlt().solve(MatrixXd::Identity(nv + 1, nv + 1));
          const MatrixXd beta = xtx_inv * (x.transpose() * y);  // (nv+1) x nv
          const MatrixXd resid = y - x * beta;
          const MatrixXd target_slope = rec.of(i).cross_E[t].middleRows(
              d.other_rank(i, j) * nv, nv);  // nv x nv, rows = components of vhat^j
          for (int c = 0; c < nv; ++c) {
            const double s2 =
                resid.col(c).squaredNorm() / static_cast<double>(n_paths - nv - 1);
            for (int r = 0; r < nv + 1; ++r) {
              const double se = std::sqrt(s2 * xtx_inv(r, r));
              const double expected = (r < nv) ? target_slope(c, r) : 0.0;
              worst = std::max(worst, safe_ratio(beta(r, c) - expected, se));
            }
          }
        }
      }
    }
    add_entry("cross-estimate linearity: regression recovers slope and offset", worst, 3.0,
              worst <= 3.0, n_paths, n_paths < min_cov_n);
  }

  // martingale increments of the private estimates
  {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t < t_end; ++t) {
        for (int c = 0; c < nv; ++c) {
          for (long p = 0; p < n_paths; ++p)
            buf[p] = paths[p].stages[t].vhat(c, i) - paths[p].stages[t - 1].vhat(c, i);
          const MeanSe ms = mean_se(buf);
          worst = std::max(worst, safe_ratio(ms.mean, ms.se));
        }
      }
    }
    add_entry("private-estimate increments have zero mean (martingale)", worst, 3.0, worst <= 3.0,
              n_paths, n_paths < min_mean_n || t_end < 2);
  }

  // whiteness: successive increments uncorrelated
  {
    double worst = 0.0;
    bool any = false;
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t + 1 < t_end; ++t) {
        for (int c = 0; c < nv; ++c) {
          for (long p = 0; p < n_paths; ++p) {
            const double d1 = paths[p].stages[t].vhat(c, i) - paths[p].stages[t - 1].vhat(c, i);
            const double d2 = paths[p].stages[t + 1].vhat(c, i) - paths[p].stages[t].vhat(c, i);
            buf[p] = d1 * d2;
          }
          const MeanSe ms = mean_se(buf);
          worst = std::max(worst, safe_ratio(ms.mean, ms.se));
          any = true;
        }
      }
    }
    add_entry("private-estimate innovations are white", worst, 3.0, worst <= 3.0, n_paths,
              !any || n_paths < min_mean_n);
  }

  // signal innovations centered: E[x_t - vhat_{t-1}] = 0
  {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t < t_end; ++t) {
        for (int c = 0; c < nv; ++c) {
          for (long p = 0; p < n_paths; ++p)
            buf[p] = paths[p].stages[t].x(c, i) - paths[p].stages[t - 1].vhat(c, i);
          const MeanSe ms = mean_se(buf);
          worst = std::max(worst, safe_ratio(ms.mean, ms.se));
        }
      }
    }
    add_entry("signal innovations centered", worst, 3.0, worst <= 3.0, n_paths,
              n_paths < min_mean_n || t_end < 2);
  }

  // on-path own-action innovations vanish identically
  {
    double worst = 0.0;
    for (long p = 0; p < std::min<long>(n_paths, 1000); ++p) {
      for (int t = 0; t < t_end; ++t) {
        const auto& st = paths[p].stages[t];
        for (int i = 0; i < n; ++i) {
          const VectorXd expect = profile.at(i, t).action(st.vhat.col(i), st.f);
          worst = std::max(worst, (st.a.col(i) - expect).cwiseAbs().maxCoeff());
        }
      }
    }
    add_entry("on-path own-action innovations vanish", worst, 1e-9, worst <= 1e-9,
              std::min<long>(n_paths, 1000), false);
  }

  // public offsets recomputable by an action-only observer, bit for bit
  {
    double worst = 0.0;
    for (long p = 0; p < std::min<long>(n_paths, 100); ++p) {
      VectorXd f = VectorXd::Zero(d.f_stack());
      for (int t = 0; t < t_end; ++t) {
        if (t > 0) {
          const auto& prev = paths[p].stages[t - 1];
          const VectorXd acts =
              Eigen::Map<const VectorXd>(prev.a.data(), d.n_actions());
          f = update_public_f(spec, rec, profile, t, f, acts);
        }
        worst = std::max(worst, (f - paths[p].stages[t].f).cwiseAbs().maxCoeff());
      }
    }
    add_entry("public offsets reproduced by action-only observer (bit-identical)", worst, 0.0,
              worst == 0.0, std::min<long>(n_paths, 100), false);
  }

  // covariance recursion is public: rebuilding it yields identical matrices
  {
    const PublicRecursion rebuilt = build_public_recursion(spec, profile);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < t_end; ++t) {
        worst = std::max(worst,
                         (rebuilt.of(i).sigma[t] - rec.of(i).sigma[t]).cwiseAbs().maxCoeff());
        worst = std::max(
            worst, (rebuilt.of(i).cross_E[t] - rec.of(i).cross_E[t]).cwiseAbs().maxCoeff());
      }
    }
    add_entry("covariances and cross-coefficients are public (bit-identical rebuild)", worst, 0.0,
              worst == 0.0, 1, false);
  }

  // conditional covariance of (V, others' estimates) matches the recursion
  {
    double worst = 0.0;
    const int dim = n * nv;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < t_end; ++t) {
        MatrixXd resid(n_paths, dim);
        for (long p = 0; p < n_paths; ++p) {
          const auto& st = paths[p].stages[t];
          resid.row(p).head(nv) = (paths[p].v - st.vhat.col(i)).transpose();
          const VectorXd pred =
              rec.of(i).cross_E[t] * st.vhat.col(i) + st.f.segment(d.fb(i), d.f_own());
          int c = nv;
          for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            resid.row(p).segment(c, nv) =
                (st.vhat.col(j) - pred.segment(d.other_rank(i, j) * nv, nv)).transpose();
            c += nv;
          }
        }
        const MatrixXd& target = rec.of(i).joint_cov[t];
        for (int r = 0; r < dim; ++r) {
          for (int c = r; c < dim; ++c) {
            for (long p = 0; p < n_paths; ++p) buf[p] = resid(p, r) * resid(p, c);
            const MeanSe ms = mean_se(buf);
            worst = std::max(worst, safe_ratio(ms.mean - target(r, c), ms.se));
          }
        }
      }
    }
    add_entry("conditional covariances match the public recursion", worst, 3.0, worst <= 3.0,
              n_paths, n_paths < min_cov_n);
  }

  return report;
}

std::string render_report(const ConsistencyReport& report) {
  std::ostringstream os;
  for (const auto& e : report.entries) {
    const char* tag = e.insufficient_samples ? "[WARN]" : (e.pass ? "[PASS]" : "[FAIL]");
    os << tag << " " << e.claim << " (statistic=" << e.statistic << ", tolerance=" << e.tolerance
       << ", n=" << e.n << ")";
    if (e.insufficient_samples) os << " insufficient samples";
    os << "\n";
  }
  os << "checks failed: " << report.failures() << " of " << report.entries.size() << "\n";
  return os.str();
}

}  // namespace lqgames
