#include <doctest.h>

#include "fixtures.hpp"
#include "lqgames/game.hpp"

using namespace lqgames;

namespace {

GameSpec tiny_spec() {
  GameSpec s;
  s.n_players = 2;
  s.horizon = 2;
  s.dim_v = 1;
  s.dim_a = 1;
  s.prior_cov = MatrixXd::Constant(1, 1, 1.0);
  s.noise_cov = {MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 1.0)};
  s.reward_mat = {MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)};
  return s;
}

}  // namespace

TEST_CASE("validate_game accepts a well-formed spec") {
  const GameSpec s = validate_game(tiny_spec());
  CHECK(s.n_players == 2);
  CHECK(s.reward_dim() == 3);
}

TEST_CASE("validate_game rejects a singular noise covariance") {
  GameSpec s = tiny_spec();
  s.noise_cov[0](0, 0) = 0.0;
  CHECK_THROWS_WITH_AS(validate_game(s), doctest::Contains("noise_cov[0]"),
                       std::invalid_argument);
}

TEST_CASE("validate_game rejects a wrongly sized reward matrix") {
  GameSpec s = tiny_spec();
  s.reward_mat[0] = MatrixXd::Identity(2, 2);
  CHECK_THROWS_WITH_AS(validate_game(s), doctest::Contains("reward_mat[0]"),
                       std::invalid_argument);
}

TEST_CASE("validate_game rejects gross asymmetry but repairs tiny asymmetry") {
  GameSpec s = tiny_spec();
  s.reward_mat[0](0, 1) = 0.5;  // asymmetric against the zero below the diagonal
  CHECK_THROWS_AS(validate_game(s), std::invalid_argument);

  GameSpec s2 = tiny_spec();
  s2.reward_mat[0](0, 1) = 1e-10;
  const GameSpec v = validate_game(s2);
  CHECK(max_asymmetry(v.reward_mat[0]) == 0.0);
}

TEST_CASE("reward evaluates the quadratic form") {
  const GameSpec s = validate_game(tiny_spec());
  VectorXd v = VectorXd::Constant(1, 1.0);
  VectorXd a(2);
  a << 1.0, 1.0;
  CHECK(reward(s, 0, v, a) == doctest::Approx(3.0));

  CHECK(reward(s, 0, VectorXd::Zero(1), VectorXd::Zero(2)) == 0.0);

  GameSpec neg = tiny_spec();
  neg.reward_mat[0] = -MatrixXd::Identity(3, 3);
  const GameSpec vneg = validate_game(neg);
  VectorXd a2(2);
  a2 << 0.0, 2.0;
  CHECK(reward(vneg, 0, v, a2) == doctest::Approx(-5.0));
}

TEST_CASE("reward_blocks partitions the identity as expected") {
  const GameSpec s = validate_game(tiny_spec());
  const RewardBlocks b = reward_blocks(s, 0);
  CHECK(b.vv(0, 0) == 1.0);
  CHECK(b.aa[0][0](0, 0) == 1.0);
  CHECK(b.aa[1][1](0, 0) == 1.0);
  CHECK(b.aa[0][1](0, 0) == 0.0);
  CHECK(b.va[0](0, 0) == 0.0);
}

TEST_CASE("reward_blocks partition inverts exactly and matches block evaluation") {
  NormalStream g(3, 0, 0);
  GameSpec s = tiny_spec();
  s.n_players = 2;
  s.dim_v = 2;
  s.dim_a = 1;
  s.prior_cov = MatrixXd::Identity(2, 2);
  s.noise_cov = {MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)};
  s.reward_mat = {testing::random_symmetric(g, 4), testing::random_symmetric(g, 4)};
  const GameSpec v = validate_game(s);

  const RewardBlocks blocks = reward_blocks(v, 0);
  CHECK((assemble_reward(v, blocks) - v.reward_mat[0]).cwiseAbs().maxCoeff() == 0.0);

  // block-wise evaluation agrees with the quadratic form
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd vv = g.vector(2);
    const VectorXd aa = g.vector(2);
    double by_blocks = vv.dot(blocks.vv * vv);
    for (int j = 0; j < 2; ++j) {
      by_blocks += 2.0 * vv.dot(blocks.va[j] * aa.segment(j, 1));
      for (int k = 0; k < 2; ++k)
        by_blocks += aa.segment(j, 1).dot(blocks.aa[j][k] * aa.segment(k, 1));
    }
    CHECK(by_blocks == doctest::Approx(reward(v, 0, vv, aa)).epsilon(1e-12));
  }
}

TEST_CASE("reward is invariant under symmetrization of the reward matrix") {
  NormalStream g(5, 0, 0);
  GameSpec s = tiny_spec();
  MatrixXd raniso(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) raniso(r, c) = g.next();
  s.reward_mat[0] = symmetrize(raniso);  // validated path requires symmetric
  const GameSpec v = validate_game(s);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd vv = g.vector(1);
    const VectorXd aa = g.vector(2);
    VectorXd z(3);
    z << vv, aa;
    const double raw = z.dot(raniso * z);
    CHECK(reward(v, 0, vv, aa) == doctest::Approx(raw).epsilon(1e-12));
  }
}
