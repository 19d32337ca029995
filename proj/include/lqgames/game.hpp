#ifndef LQGAMES_GAME_HPP
#define LQGAMES_GAME_HPP

#include <vector>

#include "lqgames/dims.hpp"
#include "lqgames/linalg.hpp"

namespace lqgames {

// Primitives of the game: a static hidden state V ~ N(0, prior_cov), private
// signals x^i_t = v + w^i_t with w^i_t ~ N(0, noise_cov[i]), and per-player
// quadratic stage rewards [v; a]' reward_mat[i] [v; a] over the stacked action
// vector a = (a^0, ..., a^{N-1}).
struct GameSpec {
  int n_players = 0;
  int horizon = 0;
  int dim_v = 0;
  int dim_a = 0;
  MatrixXd prior_cov;                // dim_v x dim_v
  std::vector<MatrixXd> noise_cov;   // per player, dim_v x dim_v, positive definite
  std::vector<MatrixXd> reward_mat;  // per player, (dim_v + N*dim_a)^2, symmetric

  Dims dims() const { return Dims{n_players, horizon, dim_v, dim_a}; }
  int reward_dim() const { return dim_v + n_players * dim_a; }
};

// Checks dimensions, symmetry and definiteness. Matrices with asymmetry at
// most 1e-9 in max norm are silently symmetrized; anything worse is an error.
// prior_cov may be positive semidefinite, noise_cov must be positive definite.
GameSpec validate_game(GameSpec spec);

// [v; a]' B^i [v; a]
double reward(const GameSpec& spec, int player, const VectorXd& v, const VectorXd& a);

// Block partition of reward_mat[player] by (v, a^0, ..., a^{N-1}).
struct RewardBlocks {
  MatrixXd vv;                          // dim_v x dim_v
  std::vector<MatrixXd> va;             // per player j: dim_v x dim_a
  std::vector<std::vector<MatrixXd>> aa;  // aa[j][k]: dim_a x dim_a
};

RewardBlocks reward_blocks(const GameSpec& spec, int player);

// Inverse of the partition; reproduces the original matrix exactly.
MatrixXd assemble_reward(const GameSpec& spec, const RewardBlocks& blocks);

}  // namespace lqgames

#endif
