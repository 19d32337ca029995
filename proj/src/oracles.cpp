#include "lqgames/oracles.hpp"

#include <Eigen/QR>
#include <sstream>
#include <stdexcept>

namespace lqgames {

namespace {

MatrixXd cod_pinv(const MatrixXd& m) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(m);
  return cod.pseudoInverse();
}

}  // namespace

ConditioningOracle::ConditioningOracle(const GameSpec& spec, const StrategyProfile& profile)
    : spec_(spec), profile_(profile) {
  const int n = spec.n_players;
  const int t_end = spec.horizon;
  const int nv = spec.dim_v;
  const int dim_g = nv * (1 + n * t_end);
  if (dim_g > 200) {
    std::ostringstream os;
    os << "conditioning oracle: primitive dimension " << dim_g << " exceeds the 200 guard";
    throw std::invalid_argument(os.str());
  }

  cov_g_ = MatrixXd::Zero(dim_g, dim_g);
  cov_g_.topLeftCorner(nv, nv) = spec.prior_cov;
  auto w_off = [&](int j, int t) { return nv * (1 + j * t_end + t); };
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < t_end; ++t)
      cov_g_.block(w_off(j, t), w_off(j, t), nv, nv) = spec.noise_cov[j];

  x_rep_.assign(n, std::vector<MatrixXd>(t_end));
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < t_end; ++t) {
      MatrixXd r = MatrixXd::Zero(nv, dim_g);
      r.leftCols(nv).setIdentity();
      r.middleCols(w_off(j, t), nv).setIdentity();
      x_rep_[j][t] = r;
    }
  }

  MatrixXd v_rep = MatrixXd::Zero(nv, dim_g);
  v_rep.leftCols(nv).setIdentity();

  // estimates, stage by stage, each from its defining conditional expectation
  est_rep_.assign(n, std::vector<MatrixXd>(t_end));
  for (int t = 0; t < t_end; ++t)
    for (int j = 0; j < n; ++j) est_rep_[j][t] = condition(v_rep, history_obs(j, t));

  cross_rep_.assign(n, std::vector<std::vector<MatrixXd>>(n, std::vector<MatrixXd>(t_end)));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_end; ++t) {
      const MatrixXd obs = history_obs(i, t);
      for (int j = 0; j < n; ++j)
        cross_rep_[i][j][t] = (j == i) ? est_rep_[i][t] : condition(est_rep_[j][t], obs);
    }
  }

  // conditional on the hidden state and every realized action
  vcond_rep_.assign(n, std::vector<MatrixXd>(t_end));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_end; ++t) {
      MatrixXd target(spec.dims().f_own(), dim_g);
      int r = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        target.middleRows(r, nv) = est_rep_[j][t];
        r += nv;
      }
      int rows = nv + t * n * spec.dim_a;
      MatrixXd obs(rows, dim_g);
      obs.topRows(nv) = v_rep;
      r = nv;
      for (int s = 0; s < t; ++s) {
        for (int j = 0; j < n; ++j) {
          obs.middleRows(r, spec.dim_a) = profile.at(j, s).l_mat * est_rep_[j][s];
          r += spec.dim_a;
        }
      }
      vcond_rep_[i][t] = condition(target, obs);
    }
  }
}

MatrixXd ConditioningOracle::history_obs(int player, int t) const {
  const int nv = spec_.dim_v;
  const int na = spec_.dim_a;
  const int n = spec_.n_players;
  const int rows = (t + 1) * nv + t * n * na;
  MatrixXd obs(rows, cov_g_.cols());
  int r = 0;
  for (int s = 0; s <= t; ++s) {
    obs.middleRows(r, nv) = x_rep_[player][s];
    r += nv;
  }
  for (int s = 0; s < t; ++s) {
    for (int j = 0; j < n; ++j) {
      obs.middleRows(r, na) = profile_.at(j, s).l_mat * est_rep_[j][s];
      r += na;
    }
  }
  return obs;
}

MatrixXd ConditioningOracle::condition(const MatrixXd& target_rep, const MatrixXd& obs_rep) const {
  if (obs_rep.rows() == 0) return MatrixXd::Zero(target_rep.rows(), target_rep.cols());
  const MatrixXd cyo = target_rep * cov_g_ * obs_rep.transpose();
  const MatrixXd coo = obs_rep * cov_g_ * obs_rep.transpose();
  return cyo * cod_pinv(coo) * obs_rep;
}

VectorXd ConditioningOracle::pack(const Primitives& prim) const {
  const int nv = spec_.dim_v;
  VectorXd g(cov_g_.rows());
  g.head(nv) = prim.v;
  int off = nv;
  for (int j = 0; j < spec_.n_players; ++j)
    for (int t = 0; t < spec_.horizon; ++t) {
      g.segment(off, nv) = prim.w.at(j).at(t);
      off += nv;
    }
  return g;
}

VectorXd ConditioningOracle::estimate_of_v(int player, int t, const Primitives& prim) const {
  if (t < 0) return VectorXd::Zero(spec_.dim_v);
  return est_rep_.at(player).at(t) * pack(prim);
}

VectorXd ConditioningOracle::estimate_of_estimate(int player, int other, int t,
                                                  const Primitives& prim) const {
  return cross_rep_.at(player).at(other).at(t) * pack(prim);
}

VectorXd ConditioningOracle::others_mean_given_v_and_actions(int player, int t,
                                                             const Primitives& prim) const {
  return vcond_rep_.at(player).at(t) * pack(prim);
}

StrategyProfile one_stage_oracle(const GameSpec& spec) {
  if (spec.horizon != 1) throw std::invalid_argument("one_stage_oracle requires horizon 1");
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int nv = d.dim_v;
  const int na = d.dim_a;

  std::vector<MatrixXd> prior_coef(n);  // E[vhat^j | vhat^i] slope, independent of i
  for (int j = 0; j < n; ++j) {
    const MatrixXd sq = spec.prior_cov + spec.noise_cov[j];
    prior_coef[j] = sq.ldlt().solve(spec.prior_cov).transpose();
  }

  std::vector<RewardBlocks> blocks(n);
  for (int i = 0; i < n; ++i) {
    blocks[i] = reward_blocks(spec, i);
    const double lam = max_eigenvalue(symmetrize(blocks[i].aa[i][i]));
    if (lam >= 0.0) {
      std::ostringstream os;
      os << "one_stage_oracle: own action block of player " << i
         << " is not negative definite (eigenvalue " << lam << ")";
      throw std::invalid_argument(os.str());
    }
  }

  auto kron = [](const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c)
        out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
  };

  // slope system: B_ii L^i + sum_{j != i} B_ij L^j prior_coef[j] = -B_{a^i,v}
  const int blk = na * nv;
  MatrixXd sys = MatrixXd::Zero(n * blk, n * blk);
  VectorXd rhs(n * blk);
  const MatrixXd eye_nv = MatrixXd::Identity(nv, nv);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const MatrixXd coef = (j == i) ? eye_nv : prior_coef[j];
      sys.block(i * blk, j * blk, blk, blk) = kron(coef.transpose(), blocks[i].aa[i][j]);
    }
    const MatrixXd bav = blocks[i].va[i].transpose();  // na x nv
    rhs.segment(i * blk, blk) = -Eigen::Map<const VectorXd>(bav.data(), blk);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(sys);
  const VectorXd sol = qr.solve(rhs);
  if ((sys * sol - rhs).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
    throw std::runtime_error("one_stage_oracle: singular first-order system");

  // constant system: sum_j B_ij c^j = 0; a nonsingular stack forces zero
  MatrixXd csys(n * na, n * na);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) csys.block(i * na, j * na, na, na) = blocks[i].aa[i][j];
  Eigen::ColPivHouseholderQR<MatrixXd> cqr(csys);
  if (cqr.rank() < n * na)
    throw std::runtime_error("one_stage_oracle: singular constant system");

  StrategyProfile out = StrategyProfile::zero(d);
  for (int i = 0; i < n; ++i)
    out.at(i, 0).l_mat = Eigen::Map<const MatrixXd>(sol.data() + i * blk, na, nv);
  return out;
}

std::vector<AffineStrategy> single_agent_lqg_oracle(const GameSpec& spec, int player) {
  const Dims d = spec.dims();
  const RewardBlocks blocks = reward_blocks(spec, player);
  for (int j = 0; j < d.n_players; ++j) {
    if (j == player) continue;
    if (blocks.aa[player][j].cwiseAbs().maxCoeff() > 0.0 ||
        blocks.aa[j][player].cwiseAbs().maxCoeff() > 0.0)
      throw std::invalid_argument(
          "single_agent_lqg_oracle: reward couples own action with another player's action");
  }
  const MatrixXd own = symmetrize(blocks.aa[player][player]);
  if (max_eigenvalue(own) >= 0.0)
    throw std::invalid_argument("single_agent_lqg_oracle: own action block not negative definite");

  // stage objective in (vhat, a): vhat'Bvv vhat + 2 vhat'Bva a + a'Baa a,
  // plus a continuation quadratic in vhat that her action cannot influence
  const MatrixXd l_t = -own.ldlt().solve(blocks.va[player].transpose());
  std::vector<AffineStrategy> out(d.horizon, AffineStrategy::zero(d));
  MatrixXd value = MatrixXd::Zero(d.dim_v, d.dim_v);
  for (int t = d.horizon - 1; t >= 0; --t) {
    out[t].l_mat = l_t;
    value = symmetrize(blocks.vv + blocks.va[player] * l_t +
                       l_t.transpose() * blocks.va[player].transpose() +
                       l_t.transpose() * own * l_t + value);
  }
  return out;
}

}  // namespace lqgames
