#ifndef LQGAMES_TESTS_FIXTURES_HPP
#define LQGAMES_TESTS_FIXTURES_HPP

#include <cstdint>

#include "lqgames/game.hpp"
#include "lqgames/rng.hpp"

namespace lqgames::testing {

inline MatrixXd random_symmetric(NormalStream& g, int n) {
  MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = g.next();
  return symmetrize(m);
}

// shifts the stacked action block to be negative definite with unit margin
inline void make_action_block_nd(MatrixXd& b, int dim_v, int n_actions) {
  MatrixXd aa = symmetrize(b.block(dim_v, dim_v, n_actions, n_actions));
  const double lam = max_eigenvalue(aa);
  b.block(dim_v, dim_v, n_actions, n_actions) =
      aa - (std::max(lam, 0.0) + 1.0) * MatrixXd::Identity(n_actions, n_actions);
}

// Two players, scalar state and actions, unit prior and noise, random
// symmetric rewards with negative definite action blocks. The workhorse
// instance for statistical checks.
inline GameSpec canonical_spec(int horizon = 3, std::uint64_t seed = 7) {
  GameSpec s;
  s.n_players = 2;
  s.horizon = horizon;
  s.dim_v = 1;
  s.dim_a = 1;
  s.prior_cov = MatrixXd::Constant(1, 1, 1.0);
  s.noise_cov = {MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 1.0)};
  for (int i = 0; i < 2; ++i) {
    NormalStream g(seed, static_cast<std::uint64_t>(i), 0xb0);
    MatrixXd b = random_symmetric(g, 3);
    make_action_block_nd(b, 1, 2);
    s.reward_mat.push_back(b);
  }
  return validate_game(s);
}

// mirror-symmetric two-player instance: swapping the action slots maps one
// player's reward onto the other's
inline GameSpec symmetric_spec(int horizon = 3, std::uint64_t seed = 11) {
  GameSpec s;
  s.n_players = 2;
  s.horizon = horizon;
  s.dim_v = 1;
  s.dim_a = 1;
  s.prior_cov = MatrixXd::Constant(1, 1, 1.0);
  s.noise_cov = {MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 1.0)};
  NormalStream g(seed, 0, 0xb1);
  MatrixXd b = random_symmetric(g, 3);
  make_action_block_nd(b, 1, 2);
  MatrixXd perm = MatrixXd::Zero(3, 3);
  perm(0, 0) = 1.0;
  perm(1, 2) = 1.0;
  perm(2, 1) = 1.0;
  s.reward_mat = {b, symmetrize(perm.transpose() * b * perm)};
  return validate_game(s);
}

// every player's reward involves only the hidden state and her own action
inline GameSpec decoupled_spec(int n_players, int horizon, std::uint64_t seed = 13) {
  GameSpec s;
  s.n_players = n_players;
  s.horizon = horizon;
  s.dim_v = 1;
  s.dim_a = 1;
  s.prior_cov = MatrixXd::Constant(1, 1, 1.0);
  for (int i = 0; i < n_players; ++i)
    s.noise_cov.push_back(MatrixXd::Constant(1, 1, 0.5 + 0.25 * i));
  const int rd = 1 + n_players;
  for (int i = 0; i < n_players; ++i) {
    NormalStream g(seed, static_cast<std::uint64_t>(i), 0xb2);
    MatrixXd b = MatrixXd::Zero(rd, rd);
    b(0, 0) = -std::abs(g.next());
    const double coupling = g.next();
    b(0, 1 + i) = coupling;
    b(1 + i, 0) = coupling;
    b(1 + i, 1 + i) = -(1.0 + std::abs(g.next()));
    s.reward_mat.push_back(b);
  }
  return validate_game(s);
}

// random instance with configurable dimensions; rewards have negative
// definite stacked action blocks so stage problems are well posed
inline GameSpec random_spec(int n_players, int horizon, int dim_v, int dim_a,
                            std::uint64_t seed) {
  GameSpec s;
  s.n_players = n_players;
  s.horizon = horizon;
  s.dim_v = dim_v;
  s.dim_a = dim_a;
  NormalStream g(seed, 0, 0xb3);
  {
    MatrixXd a(dim_v, dim_v);
    for (int r = 0; r < dim_v; ++r)
      for (int c = 0; c < dim_v; ++c) a(r, c) = g.next();
    s.prior_cov = symmetrize(a * a.transpose()) + 0.2 * MatrixXd::Identity(dim_v, dim_v);
  }
  for (int i = 0; i < n_players; ++i) {
    MatrixXd a(dim_v, dim_v);
    for (int r = 0; r < dim_v; ++r)
      for (int c = 0; c < dim_v; ++c) a(r, c) = g.next();
    s.noise_cov.push_back(symmetrize(a * a.transpose()) +
                          0.3 * MatrixXd::Identity(dim_v, dim_v));
  }
  const int rd = dim_v + n_players * dim_a;
  for (int i = 0; i < n_players; ++i) {
    MatrixXd b(rd, rd);
    for (int r = 0; r < rd; ++r)
      for (int c = 0; c < rd; ++c) b(r, c) = 0.5 * g.next();
    b = symmetrize(b);
    make_action_block_nd(b, dim_v, n_players * dim_a);
    s.reward_mat.push_back(b);
  }
  return validate_game(s);
}

}  // namespace lqgames::testing

#endif
