#ifndef LQGAMES_ORACLES_HPP
#define LQGAMES_ORACLES_HPP

#include <vector>

#include "lqgames/game.hpp"
#include "lqgames/rng.hpp"
#include "lqgames/strategy.hpp"

namespace lqgames {

// Exact conditional means by dense joint-Gaussian conditioning over the
// primitive vector g = (V, all signal noises). Estimates are represented as
// linear functionals of g and built recursively from their definitions, never
// from the filter recursions: on the equilibrium path the informative content
// of each observed action is L vhat, whose functional is already known, so
// histories reduce to known rows of g.
//
// Intended for desk-scale checks; the primitive dimension is capped at 200.
class ConditioningOracle {
 public:
  ConditioningOracle(const GameSpec& spec, const StrategyProfile& profile);

  int primitive_dim() const { return static_cast<int>(cov_g_.rows()); }
  VectorXd pack(const Primitives& prim) const;

  // E[V | h^player_t]; t < 0 means no observations (prior mean, zero)
  VectorXd estimate_of_v(int player, int t, const Primitives& prim) const;

  // E[vhat^other_t | h^player_t]
  VectorXd estimate_of_estimate(int player, int other, int t, const Primitives& prim) const;

  // E[vhat_others(player)_t | v, a_{0:t-1}] stacked over the others of
  // `player` in ascending order
  VectorXd others_mean_given_v_and_actions(int player, int t, const Primitives& prim) const;

  // linear functional of vhat^j_t over g (for tests)
  const MatrixXd& estimate_rep(int j, int t) const { return est_rep_.at(j).at(t); }

 private:
  MatrixXd condition(const MatrixXd& target_rep, const MatrixXd& obs_rep) const;
  MatrixXd history_obs(int player, int t) const;

  const GameSpec spec_;
  const StrategyProfile profile_;
  MatrixXd cov_g_;
  std::vector<std::vector<MatrixXd>> x_rep_;    // [player][stage]
  std::vector<std::vector<MatrixXd>> est_rep_;  // [player][stage]
  std::vector<std::vector<std::vector<MatrixXd>>> cross_rep_;  // [i][j][t]
  std::vector<std::vector<MatrixXd>> vcond_rep_;  // [i][t]
};

// Closed-form equilibrium of the one-stage game: stacks every player's
// first-order condition, with cross-estimates entering through the prior
// coefficients Sigma (Sigma + Q^j)^{-1}, and solves one dense linear system.
// Offsets solve the homogeneous constant system (zero for a nonsingular one).
StrategyProfile one_stage_oracle(const GameSpec& spec);

// Reference policy for a player whose reward does not couple her action to
// the other players' actions: textbook backward induction on a quadratic
// value in the private estimate. The hidden state is static and her own
// action never feeds her own filter, so the policy is myopic at every stage.
std::vector<AffineStrategy> single_agent_lqg_oracle(const GameSpec& spec, int player);

}  // namespace lqgames

#endif
