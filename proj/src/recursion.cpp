#include "lqgames/recursion.hpp"

#include <sstream>
#include <stdexcept>

namespace lqgames {

namespace {

// Sigma (Sigma + Q_j)^{-1}; Sigma + Q_j is positive definite by validation.
MatrixXd prior_signal_gain(const GameSpec& spec, int j) {
  const MatrixXd sq = spec.prior_cov + spec.noise_cov[j];
  // K = Sigma sq^{-1}  <=>  K' = sq^{-1} Sigma
  return sq.ldlt().solve(spec.prior_cov).transpose();
}

// blockdiag(L_j) over the others of player i, ascending
MatrixXd l_others_diag(const Dims& d, int i, const std::vector<MatrixXd>& l_all) {
  std::vector<MatrixXd> blocks;
  blocks.reserve(d.n_players - 1);
  for (int j = 0; j < d.n_players; ++j)
    if (j != i) blocks.push_back(l_all[j]);
  return block_diag(blocks);
}

// prior second-moment matrix of s_0 = [v; 0; 0; x_0]
MatrixXd prior_state_cov(const GameSpec& spec, int i) {
  const Dims d = spec.dims();
  const int nv = d.dim_v;
  MatrixXd s = MatrixXd::Zero(d.n_state(), d.n_state());
  s.block(d.sb_v(), d.sb_v(), nv, nv) = spec.prior_cov;
  s.block(d.sb_v(), d.sb_x(), nv, nv) = spec.prior_cov;
  s.block(d.sb_x(), d.sb_v(), nv, nv) = spec.prior_cov;
  s.block(d.sb_x(), d.sb_x(), nv, nv) = spec.prior_cov + spec.noise_cov[i];
  return s;
}

// observation map of the init stage: only the own signal rows are live
MatrixXd init_observation_matrix(const Dims& d) {
  MatrixXd c = MatrixXd::Zero(d.n_obs(), d.n_state());
  c.block(d.ob_x(), d.sb_x(), d.dim_v, d.dim_v).setIdentity();
  return c;
}

MatrixXd select_rows_v_others(const Dims& d, int i, const MatrixXd& m) {
  const int nv = d.dim_v;
  MatrixXd out(d.tilde_state(), m.cols());
  out.topRows(nv) = m.middleRows(d.sb_v(), nv);
  int r = nv;
  for (int j = 0; j < d.n_players; ++j) {
    if (j == i) continue;
    out.middleRows(r, nv) = m.middleRows(d.sb_other(i, j), nv);
    r += nv;
  }
  return out;
}

MatrixXd select_cols_v_others(const Dims& d, int i, const MatrixXd& m) {
  return select_rows_v_others(d, i, m.transpose()).transpose();
}

}  // namespace

StageModel init_stage_model(const GameSpec& spec, int player) {
  const Dims d = spec.dims();
  const int nv = d.dim_v;
  StageModel m;
  m.player = player;
  m.stage = 0;
  m.a_mat = MatrixXd::Zero(d.n_state(), d.n_state());
  m.h_mat = MatrixXd::Zero(d.n_state(), d.n_noise());
  m.a_mat.block(d.sb_v(), d.sb_v(), nv, nv).setIdentity();
  m.a_mat.block(d.sb_x(), d.sb_v(), nv, nv).setIdentity();
  m.a_mat.block(d.sb_self(), d.sb_x(), nv, nv) = prior_signal_gain(spec, player);
  for (int j = 0; j < d.n_players; ++j) {
    if (j == player) continue;
    const MatrixXd kj = prior_signal_gain(spec, j);
    m.a_mat.block(d.sb_other(player, j), d.sb_v(), nv, nv) = kj;
    m.h_mat.block(d.sb_other(player, j), d.nz_other(player, j), nv, nv) = kj;
  }
  m.h_mat.block(d.sb_x(), d.nz_own_next(), nv, nv).setIdentity();
  m.c_mat = init_observation_matrix(d);
  m.g_self = m.a_mat.middleRows(d.sb_self(), nv);
  m.g_others = m.a_mat.middleRows(2 * nv, (d.n_players - 1) * nv);
  m.d_coeff = MatrixXd::Zero(d.n_state(), d.n_players * (d.n_players - 1) * d.dim_a);
  return m;
}

MatrixXd build_observation_matrix(const GameSpec& spec, int player, int stage,
                                  const std::vector<MatrixXd>& l_prev) {
  const Dims d = spec.dims();
  if (stage < 1) return init_observation_matrix(d);
  MatrixXd c = MatrixXd::Zero(d.n_obs(), d.n_state());
  c.block(d.ob_self(), d.sb_self(), d.dim_a, d.dim_v) = l_prev.at(player);
  for (int j = 0; j < d.n_players; ++j) {
    if (j == player) continue;
    c.block(d.ob_other(player, j), d.sb_other(player, j), d.dim_a, d.dim_v) = l_prev.at(j);
  }
  c.block(d.ob_x(), d.sb_x(), d.dim_v, d.dim_v).setIdentity();
  return c;
}

StageModel build_stage_model(const GameSpec& spec, int player, int stage,
                             const std::vector<MatrixXd>& l_prev,
                             const std::vector<MatrixXd>& gains,
                             const std::vector<MatrixXd>& cross_E_prev) {
  if (stage == 0) return init_stage_model(spec, player);
  const Dims d = spec.dims();
  const int nv = d.dim_v;
  const int na = d.dim_a;
  const int nw = (d.n_players - 1) * na;  // width of one player's others'-action block
  if (static_cast<int>(gains.size()) != d.n_players)
    throw std::invalid_argument("build_stage_model: missing gains for this stage");

  StageModel m;
  m.player = player;
  m.stage = stage;
  m.a_mat = MatrixXd::Zero(d.n_state(), d.n_state());
  m.h_mat = MatrixXd::Zero(d.n_state(), d.n_noise());
  m.d_coeff = MatrixXd::Zero(d.n_state(), d.n_players * nw);
  m.a_mat.block(d.sb_v(), d.sb_v(), nv, nv).setIdentity();
  m.a_mat.block(d.sb_x(), d.sb_v(), nv, nv).setIdentity();
  m.h_mat.block(d.sb_x(), d.nz_own_next(), nv, nv).setIdentity();

  // per-player pieces of their own stage gain: v-rows on x and others'-action
  // columns, plus the ja blockdiag(L_others) E_prev product
  for (int j = 0; j < d.n_players; ++j) {
    const MatrixXd& gj = gains[j];
    const MatrixXd jx = gj.block(0, d.ob_x(), nv, nv);
    const MatrixXd ja = gj.block(0, na, nv, nw);
    const MatrixXd ld = l_others_diag(d, j, l_prev);
    const MatrixXd own_col = MatrixXd::Identity(nv, nv) - ja * ld * cross_E_prev.at(j) - jx;
    const int row = (j == player) ? d.sb_self() : d.sb_other(player, j);
    if (j == player) {
      m.a_mat.block(row, d.sb_x(), nv, nv) = jx;
      m.a_mat.block(row, d.sb_self(), nv, nv) = own_col;
    } else {
      // x_j is not carried in this model; substitute x_j = v + w_j
      m.a_mat.block(row, d.sb_v(), nv, nv) = jx;
      m.a_mat.block(row, d.sb_other(player, j), nv, nv) = own_col;
      m.h_mat.block(row, d.nz_other(player, j), nv, nv) = jx;
    }
    m.d_coeff.block(row, j * nw, nv, nw) = ja;
  }

  m.c_mat = build_observation_matrix(spec, player, stage, l_prev);
  m.g_self = m.a_mat.middleRows(d.sb_self(), nv);
  m.g_others = m.a_mat.middleRows(2 * nv, (d.n_players - 1) * nv);
  return m;
}

MatrixXd noise_cov_stacked(const GameSpec& spec, int player) {
  std::vector<MatrixXd> blocks;
  for (int j = 0; j < spec.n_players; ++j)
    if (j != player) blocks.push_back(spec.noise_cov[j]);
  blocks.push_back(spec.noise_cov[player]);
  return block_diag(blocks);
}

MatrixXd predict_cov(const GameSpec& spec, int player, const MatrixXd& sigma,
                     const StageModel& model) {
  return symmetrize(model.a_mat * sigma * model.a_mat.transpose() +
                    model.h_mat * noise_cov_stacked(spec, player) * model.h_mat.transpose());
}

MatrixXd kalman_gain(const MatrixXd& sigma_pred, const MatrixXd& c_mat) {
  const MatrixXd sc = sigma_pred * c_mat.transpose();
  const MatrixXd inn = symmetrize(c_mat * sc);
  const MatrixXd j = sc * pinv(inn);
  const double scale = std::max(1.0, sc.cwiseAbs().maxCoeff());
  const double resid = (j * inn - sc).cwiseAbs().maxCoeff();
  if (resid > 1e-8 * scale) {
    std::ostringstream os;
    os << "kalman_gain: normal-equation residual " << resid << " exceeds tolerance";
    throw std::runtime_error(os.str());
  }
  return j;
}

MatrixXd correct_cov(const MatrixXd& sigma_pred, const MatrixXd& gain, const MatrixXd& c_mat) {
  const MatrixXd out =
      symmetrize((MatrixXd::Identity(sigma_pred.rows(), sigma_pred.cols()) - gain * c_mat) *
                 sigma_pred);
  const double lam = min_eigenvalue(out);
  if (lam < -1e-6) {
    std::ostringstream os;
    os << "covariance update lost positive semidefiniteness (eigenvalue " << lam << ")";
    throw std::runtime_error(os.str());
  }
  return out;
}

MatrixXd update_cov(const GameSpec& spec, int player, const MatrixXd& sigma,
                    const StageModel& model, const MatrixXd& gain_next, const MatrixXd& c_next) {
  return correct_cov(predict_cov(spec, player, sigma, model), gain_next, c_next);
}

PublicRecursion build_public_recursion(const GameSpec& spec, const StrategyProfile& profile) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int t_end = d.horizon;
  const int nv = d.dim_v;
  const int na = d.dim_a;
  const int f_own = d.f_own();

  PublicRecursion rec;
  rec.dims = d;
  rec.players.resize(n);
  for (auto& pr : rec.players) {
    pr.model.resize(t_end);
    pr.gain.resize(t_end);
    pr.sigma.resize(t_end);
    pr.sigma_pred.resize(t_end);
    pr.pred_next.resize(t_end);
    pr.joint_cov.resize(t_end);
    pr.jx.resize(t_end);
    pr.ja.resize(t_end);
    pr.cross_E.resize(t_end);
    pr.tilde_a.resize(t_end);
    pr.tilde_h.resize(t_end);
    pr.tilde_c.resize(t_end);
    pr.tilde_gain.resize(t_end);
    pr.tilde_pred.resize(t_end);
    pr.tilde_sigma.resize(t_end);
    pr.f_lin.resize(t_end);
    pr.f_act.resize(t_end);
  }

  // Q blockdiag over the others of i, in its noise layout
  auto q_others = [&](int i) {
    std::vector<MatrixXd> blocks;
    for (int j = 0; j < n; ++j)
      if (j != i) blocks.push_back(spec.noise_cov[j]);
    return block_diag(blocks);
  };

  // init stage
  for (int i = 0; i < n; ++i) {
    PlayerRecursion& pr = rec.players[i];
    pr.init_gain = prior_signal_gain(spec, i);
    pr.model[0] = init_stage_model(spec, i);
    pr.sigma_pred[0] = prior_state_cov(spec, i);
    pr.gain[0] = kalman_gain(pr.sigma_pred[0], pr.model[0].c_mat);
    pr.sigma[0] = correct_cov(pr.sigma_pred[0], pr.gain[0], pr.model[0].c_mat);
    pr.jx[0] = pr.gain[0].block(0, d.ob_x(), nv, nv);
    pr.ja[0] = pr.gain[0].block(0, na, nv, (n - 1) * na);

    MatrixXd e0(f_own, nv);
    int r = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      e0.middleRows(r, nv) = prior_signal_gain(spec, j);
      r += nv;
    }
    pr.cross_E[0] = e0;

    // conditional model at the init stage; its posterior is exactly zero
    // because the first conditional observation is v itself
    pr.tilde_a[0] = MatrixXd::Zero(d.tilde_state(), d.tilde_state());
    pr.tilde_a[0].topLeftCorner(nv, nv).setIdentity();
    pr.tilde_a[0].bottomLeftCorner(f_own, nv) = e0;
    pr.tilde_h[0] = MatrixXd::Zero(d.tilde_state(), f_own);
    pr.tilde_h[0].bottomRows(f_own) = block_diag([&] {
      std::vector<MatrixXd> blocks;
      for (int j = 0; j < n; ++j)
        if (j != i) blocks.push_back(prior_signal_gain(spec, j));
      return blocks;
    }());
    {
      MatrixXd ts = MatrixXd::Zero(d.tilde_state(), d.tilde_state());
      ts.topLeftCorner(nv, nv) = spec.prior_cov;
      MatrixXd tv = MatrixXd::Zero(d.tilde_state(), nv);
      tv.topRows(nv) = spec.prior_cov;
      pr.tilde_sigma[0] = symmetrize(ts - tv * pinv(spec.prior_cov) * tv.transpose());
    }
  }

  auto finish_stage = [&](int t) {
    for (int i = 0; i < n; ++i) {
      PlayerRecursion& pr = rec.players[i];
      pr.pred_next[t] = predict_cov(spec, i, pr.sigma[t], pr.model[t]);
      pr.joint_cov[t] = select_cols_v_others(d, i, select_rows_v_others(d, i, pr.pred_next[t]));
    }
  };
  finish_stage(0);

  for (int t = 1; t < t_end; ++t) {
    std::vector<MatrixXd> l_prev(n);
    for (int j = 0; j < n; ++j) l_prev[j] = profile.at(j, t - 1).l_mat;

    std::vector<MatrixXd> gains(n), cross_prev(n);
    for (int i = 0; i < n; ++i) {
      PlayerRecursion& pr = rec.players[i];
      const MatrixXd c = build_observation_matrix(spec, i, t, l_prev);
      pr.sigma_pred[t] = pr.pred_next[t - 1];
      pr.gain[t] = kalman_gain(pr.sigma_pred[t], c);
      pr.sigma[t] = correct_cov(pr.sigma_pred[t], pr.gain[t], c);
      pr.jx[t] = pr.gain[t].block(0, d.ob_x(), nv, nv);
      pr.ja[t] = pr.gain[t].block(0, na, nv, (n - 1) * na);
      gains[i] = pr.gain[t];
      cross_prev[i] = pr.cross_E[t - 1];
    }

    for (int i = 0; i < n; ++i) {
      PlayerRecursion& pr = rec.players[i];
      pr.model[t] = build_stage_model(spec, i, t, l_prev, gains, cross_prev);

      pr.tilde_a[t] = MatrixXd::Zero(d.tilde_state(), d.tilde_state());
      pr.tilde_a[t].topLeftCorner(nv, nv).setIdentity();
      pr.tilde_a[t].bottomRows(f_own) =
          select_cols_v_others(d, i, pr.model[t].g_others);
      pr.tilde_h[t] = MatrixXd::Zero(d.tilde_state(), f_own);
      pr.tilde_h[t].bottomRows(f_own) =
          pr.model[t].h_mat.block(2 * nv, 0, f_own, f_own);

      const MatrixXd ld = l_others_diag(d, i, l_prev);
      pr.tilde_c[t] = MatrixXd::Zero(d.tilde_obs(), d.tilde_state());
      pr.tilde_c[t].topLeftCorner(nv, nv).setIdentity();
      pr.tilde_c[t].block(nv, nv, (n - 1) * na, f_own) = ld;

      pr.tilde_pred[t] =
          symmetrize(pr.tilde_a[t - 1] * pr.tilde_sigma[t - 1] * pr.tilde_a[t - 1].transpose() +
                     pr.tilde_h[t - 1] * q_others(i) * pr.tilde_h[t - 1].transpose());
      pr.tilde_gain[t] = kalman_gain(pr.tilde_pred[t], pr.tilde_c[t]);
      pr.tilde_sigma[t] = correct_cov(pr.tilde_pred[t], pr.tilde_gain[t], pr.tilde_c[t]);

      const MatrixXd aj = pr.tilde_a[t] * pr.tilde_gain[t];
      pr.f_act[t] = aj.block(nv, nv, f_own, (n - 1) * na);
      const MatrixXd g_vh =
          select_cols_v_others(d, i, pr.model[t].g_others).rightCols(f_own);
      const MatrixXd g_v = pr.model[t].g_others.middleCols(d.sb_v(), nv);
      pr.f_lin[t] = g_vh - pr.f_act[t] * ld;
      pr.cross_E[t] = g_v + pr.f_lin[t] * pr.cross_E[t - 1];
    }
    finish_stage(t);
  }
  return rec;
}

VectorXd init_private(const PublicRecursion& rec, int player, const VectorXd& x0) {
  return rec.of(player).init_gain * x0;
}

VectorXd action_innovation_shifts(const GameSpec& spec, const PublicRecursion& rec,
                                  const StrategyProfile& profile, int stage,
                                  const VectorXd& f_prev, const VectorXd& actions_prev) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int nv = d.dim_v;
  const int na = d.dim_a;
  VectorXd shifts(n * nv);
  for (int l = 0; l < n; ++l) {
    VectorXd iota((n - 1) * na);
    int r = 0;
    for (int j = 0; j < n; ++j) {
      if (j == l) continue;
      const auto& st = profile.at(j, stage - 1);
      iota.segment(r, na) = actions_prev.segment(d.ab(j), na) - st.offset(f_prev) -
                            st.l_mat * f_prev.segment(d.fb_slot(l, j), nv);
      r += na;
    }
    shifts.segment(l * nv, nv) = rec.of(l).ja[stage] * iota;
  }
  return shifts;
}

VectorXd update_private(const GameSpec& spec, const PublicRecursion& rec,
                        const StrategyProfile& profile, int player, int stage,
                        const VectorXd& vhat_prev, const VectorXd& f_prev,
                        const VectorXd& x_t, const VectorXd& actions_prev) {
  const Dims d = spec.dims();
  if (x_t.size() != d.dim_v || vhat_prev.size() != d.dim_v)
    throw std::invalid_argument("update_private: dimension mismatch");
  const PlayerRecursion& pr = rec.of(player);
  std::vector<MatrixXd> l_prev(d.n_players);
  for (int j = 0; j < d.n_players; ++j) l_prev[j] = profile.at(j, stage - 1).l_mat;
  const MatrixXd ld = [&] {
    std::vector<MatrixXd> blocks;
    for (int j = 0; j < d.n_players; ++j)
      if (j != player) blocks.push_back(l_prev[j]);
    return block_diag(blocks);
  }();

  VectorXd iota((d.n_players - 1) * d.dim_a);
  int r = 0;
  for (int j = 0; j < d.n_players; ++j) {
    if (j == player) continue;
    const auto& st = profile.at(j, stage - 1);
    iota.segment(r, d.dim_a) = actions_prev.segment(d.ab(j), d.dim_a) - st.offset(f_prev) -
                               st.l_mat * f_prev.segment(d.fb_slot(player, j), d.dim_v);
    r += d.dim_a;
  }
  return vhat_prev + pr.jx[stage] * (x_t - vhat_prev) -
         pr.ja[stage] * ld * pr.cross_E[stage - 1] * vhat_prev + pr.ja[stage] * iota;
}

VectorXd update_public_f(const GameSpec& spec, const PublicRecursion& rec,
                         const StrategyProfile& profile, int stage, const VectorXd& f_prev,
                         const VectorXd& actions_prev) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int nv = d.dim_v;
  const int na = d.dim_a;
  const VectorXd shifts = action_innovation_shifts(spec, rec, profile, stage, f_prev, actions_prev);
  VectorXd f_next(d.f_stack());
  for (int j = 0; j < n; ++j) {
    const PlayerRecursion& pr = rec.of(j);
    VectorXd act_inn((n - 1) * na);
    VectorXd delta(d.f_own());
    int ra = 0, rv = 0;
    for (int l = 0; l < n; ++l) {
      if (l == j) continue;
      const auto& st = profile.at(l, stage - 1);
      act_inn.segment(ra, na) = actions_prev.segment(d.ab(l), na) - st.offset(f_prev);
      delta.segment(rv, nv) = shifts.segment(l * nv, nv);
      ra += na;
      rv += nv;
    }
    f_next.segment(d.fb(j), d.f_own()) =
        pr.f_lin[stage] * f_prev.segment(d.fb(j), d.f_own()) + pr.f_act[stage] * act_inn + delta;
  }
  return f_next;
}

VectorXd cross_estimate(const PublicRecursion& rec, int player, int stage, const VectorXd& vhat,
                        const VectorXd& f_stack) {
  const Dims& d = rec.dims;
  return rec.of(player).cross_E[stage] * vhat + f_stack.segment(d.fb(player), d.f_own());
}

}  // namespace lqgames
