#ifndef LQGAMES_RECURSION_HPP
#define LQGAMES_RECURSION_HPP

#include <vector>

#include "lqgames/game.hpp"
#include "lqgames/strategy.hpp"

namespace lqgames {

// One stage of player i's stacked Gauss-Markov model,
//   s_{t+1} = a_mat s_t + h_mat [w_others(t); w_self(t+1)] + d_t,
// with s_t = [v; vhat_self(t-1); vhat_others(t-1); x_self(t)] and the
// observation consumed at stage t given by y_t = c_mat s_t.
//
// The offset d_t depends on realized public actions, so it is kept as a
// coefficient map (d_coeff) applied at runtime to the stacked per-player
// action innovations iota = (iota^0; ...; iota^{N-1}), where
//   iota^l = a_others(l) - m_others(l) - blockdiag(L_others(l)) f^l.
struct StageModel {
  int player = 0;
  int stage = 0;
  MatrixXd a_mat;    // n_state x n_state
  MatrixXd h_mat;    // n_state x n_noise
  MatrixXd c_mat;    // n_obs x n_state
  MatrixXd g_self;   // vhat_self row block of a_mat
  MatrixXd g_others; // vhat_others row block of a_mat
  MatrixXd d_coeff;  // n_state x N*(N-1)*dim_a
};

// All strategy-dependent but observation-independent quantities for one
// player: filter covariances and gains for the stacked model, the conditional
// (tilde) model driving the cross-estimate recursion, and the coefficient
// maps needed by the online updates. Everything here depends on the profile
// only through the L coefficients.
struct PlayerRecursion {
  MatrixXd init_gain;              // Sigma (Sigma + Q^i)^{-1}
  std::vector<StageModel> model;   // t = 0..T-1
  std::vector<MatrixXd> gain;      // t = 0..T-1 (t=0: gain of the init correction)
  std::vector<MatrixXd> sigma;     // t: Cov(s_t | h_t), posterior
  std::vector<MatrixXd> sigma_pred;  // t >= 1: Cov(s_t | h_{t-1}); [0] is the prior of s_0
  std::vector<MatrixXd> pred_next;   // t: Cov(s_{t+1} | h_t)
  std::vector<MatrixXd> joint_cov;   // t: Cov([V; vhat_others(t)] | h_t)
  std::vector<MatrixXd> jx;        // t: v-rows of gain, x columns (dim_v x dim_v)
  std::vector<MatrixXd> ja;        // t: v-rows of gain, others'-action columns
  std::vector<MatrixXd> cross_E;   // t: f_own x dim_v
  std::vector<MatrixXd> tilde_a;   // t = 0..T-1
  std::vector<MatrixXd> tilde_h;   // t = 0..T-1
  std::vector<MatrixXd> tilde_c;     // t >= 1
  std::vector<MatrixXd> tilde_gain;  // t >= 1
  std::vector<MatrixXd> tilde_pred;  // t >= 1
  std::vector<MatrixXd> tilde_sigma; // t = 0..T-1 (posterior; 0 at t=0)
  std::vector<MatrixXd> f_lin;     // t >= 1: coefficient on the own f block
  std::vector<MatrixXd> f_act;     // t >= 1: coefficient on (a_others - m_others)
};

struct PublicRecursion {
  Dims dims;
  std::vector<PlayerRecursion> players;
  const PlayerRecursion& of(int i) const { return players.at(i); }
};

// --- stage model construction ---------------------------------------------

StageModel init_stage_model(const GameSpec& spec, int player);

// Observation map consumed at `stage` (>= 1), built from the previous-stage
// L coefficients of all players.
MatrixXd build_observation_matrix(const GameSpec& spec, int player, int stage,
                                  const std::vector<MatrixXd>& l_prev);

// Stage model for `stage` >= 1. `gains` are the stage gains of all players
// (each in its owner's layout); `cross_E_prev` the previous cross-estimate
// coefficients of all players. Delegates to init_stage_model at stage 0.
StageModel build_stage_model(const GameSpec& spec, int player, int stage,
                             const std::vector<MatrixXd>& l_prev,
                             const std::vector<MatrixXd>& gains,
                             const std::vector<MatrixXd>& cross_E_prev);

// --- covariance recursions -------------------------------------------------

// blockdiag(Q_others(i)..., Q_i) in the noise layout of player i's model
MatrixXd noise_cov_stacked(const GameSpec& spec, int player);

MatrixXd predict_cov(const GameSpec& spec, int player, const MatrixXd& sigma,
                     const StageModel& model);

// J = S C' (C S C')^+ with truncated-SVD pseudo-inverse; the least-squares
// residual of the defining equation is asserted small.
MatrixXd kalman_gain(const MatrixXd& sigma_pred, const MatrixXd& c_mat);

// (I - J C) sigma_pred, symmetrized; throws on PSD violation beyond -1e-6.
MatrixXd correct_cov(const MatrixXd& sigma_pred, const MatrixXd& gain, const MatrixXd& c_mat);

// Full step: sigma at stage k -> sigma at stage k+1 given the stage-k model
// and the stage-(k+1) gain and observation map.
MatrixXd update_cov(const GameSpec& spec, int player, const MatrixXd& sigma,
                    const StageModel& model, const MatrixXd& gain_next, const MatrixXd& c_next);

// Builds every player's recursion for a fixed profile. Deterministic:
// identical inputs produce bit-identical output.
PublicRecursion build_public_recursion(const GameSpec& spec, const StrategyProfile& profile);

// --- online (observation-dependent) updates --------------------------------

// Player i's estimate after the first observation.
VectorXd init_private(const PublicRecursion& rec, int player, const VectorXd& x0);

// Per-player public estimate shifts delta^l = ja_l iota^l implied by the
// actions observed entering `stage`; returns the N*dim_v stack.
VectorXd action_innovation_shifts(const GameSpec& spec, const PublicRecursion& rec,
                                  const StrategyProfile& profile, int stage,
                                  const VectorXd& f_prev, const VectorXd& actions_prev);

// Player i's estimate update processing the stage-t signal x_t and the
// stage-(t-1) actions (t >= 1). Off-path actions go through the same affine
// map; the own-action innovation never enters.
VectorXd update_private(const GameSpec& spec, const PublicRecursion& rec,
                        const StrategyProfile& profile, int player, int stage,
                        const VectorXd& vhat_prev, const VectorXd& f_prev,
                        const VectorXd& x_t, const VectorXd& actions_prev);

// Full public offset stack update for stage t >= 1.
VectorXd update_public_f(const GameSpec& spec, const PublicRecursion& rec,
                         const StrategyProfile& profile, int stage,
                         const VectorXd& f_prev, const VectorXd& actions_prev);

// E^i_t vhat + f^i_t: player i's estimate of the others' estimates.
VectorXd cross_estimate(const PublicRecursion& rec, int player, int stage,
                        const VectorXd& vhat, const VectorXd& f_stack);

}  // namespace lqgames

#endif
