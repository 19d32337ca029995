#include "lqgames/game.hpp"

#include <sstream>
#include <stdexcept>

namespace lqgames {

namespace {

constexpr double kAsymTol = 1e-9;
constexpr double kPsdTol = -1e-10;
constexpr double kPdTol = 1e-10;

void check_square(const MatrixXd& m, int n, const std::string& field) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << "dimension mismatch: " << field << " must be " << n << "x" << n << ", got "
       << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

MatrixXd require_symmetric(MatrixXd m, const std::string& field) {
  const double asym = max_asymmetry(m);
  if (asym > kAsymTol) {
    std::ostringstream os;
    os << field << " is not symmetric (max asymmetry " << asym << " exceeds " << kAsymTol << ")";
    throw std::invalid_argument(os.str());
  }
  return symmetrize(m);
}

}  // namespace

GameSpec validate_game(GameSpec spec) {
  if (spec.n_players < 1) throw std::invalid_argument("n_players must be positive");
  if (spec.horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (spec.dim_v < 1) throw std::invalid_argument("dim_v must be positive");
  if (spec.dim_a < 1) throw std::invalid_argument("dim_a must be positive");

  check_square(spec.prior_cov, spec.dim_v, "prior_cov");
  spec.prior_cov = require_symmetric(spec.prior_cov, "prior_cov");
  {
    const double lam = min_eigenvalue(spec.prior_cov);
    if (lam < kPsdTol) {
      std::ostringstream os;
      os << "prior_cov is not positive semidefinite (eigenvalue " << lam << ")";
      throw std::invalid_argument(os.str());
    }
  }

  if (static_cast<int>(spec.noise_cov.size()) != spec.n_players)
    throw std::invalid_argument("dimension mismatch: noise_cov must have one matrix per player");
  for (int i = 0; i < spec.n_players; ++i) {
    const std::string field = "noise_cov[" + std::to_string(i) + "]";
    check_square(spec.noise_cov[i], spec.dim_v, field);
    spec.noise_cov[i] = require_symmetric(spec.noise_cov[i], field);
    const double lam = min_eigenvalue(spec.noise_cov[i]);
    if (lam < kPdTol) {
      std::ostringstream os;
      os << field << " is not positive definite (eigenvalue " << lam << ")";
      throw std::invalid_argument(os.str());
    }
  }

  if (static_cast<int>(spec.reward_mat.size()) != spec.n_players)
    throw std::invalid_argument("dimension mismatch: reward_mat must have one matrix per player");
  for (int i = 0; i < spec.n_players; ++i) {
    const std::string field = "reward_mat[" + std::to_string(i) + "]";
    check_square(spec.reward_mat[i], spec.reward_dim(), field);
    spec.reward_mat[i] = require_symmetric(spec.reward_mat[i], field);
  }
  return spec;
}

double reward(const GameSpec& spec, int player, const VectorXd& v, const VectorXd& a) {
  if (v.size() != spec.dim_v)
    throw std::invalid_argument("dimension mismatch: v has wrong size");
  if (a.size() != spec.n_players * spec.dim_a)
    throw std::invalid_argument("dimension mismatch: stacked action has wrong size");
  VectorXd z(spec.reward_dim());
  z << v, a;
  return z.dot(spec.reward_mat.at(player) * z);
}

RewardBlocks reward_blocks(const GameSpec& spec, int player) {
  const MatrixXd& b = spec.reward_mat.at(player);
  const int nv = spec.dim_v;
  const int na = spec.dim_a;
  RewardBlocks out;
  out.vv = b.topLeftCorner(nv, nv);
  out.va.resize(spec.n_players);
  out.aa.assign(spec.n_players, std::vector<MatrixXd>(spec.n_players));
  for (int j = 0; j < spec.n_players; ++j) {
    out.va[j] = b.block(0, nv + j * na, nv, na);
    for (int k = 0; k < spec.n_players; ++k)
      out.aa[j][k] = b.block(nv + j * na, nv + k * na, na, na);
  }
  return out;
}

MatrixXd assemble_reward(const GameSpec& spec, const RewardBlocks& blocks) {
  const int nv = spec.dim_v;
  const int na = spec.dim_a;
  MatrixXd b = MatrixXd::Zero(spec.reward_dim(), spec.reward_dim());
  b.topLeftCorner(nv, nv) = blocks.vv;
  for (int j = 0; j < spec.n_players; ++j) {
    b.block(0, nv + j * na, nv, na) = blocks.va[j];
    b.block(nv + j * na, 0, na, nv) = blocks.va[j].transpose();
    for (int k = 0; k < spec.n_players; ++k)
      b.block(nv + j * na, nv + k * na, na, na) = blocks.aa[j][k];
  }
  return b;
}

}  // namespace lqgames
