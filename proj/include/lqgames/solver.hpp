#ifndef LQGAMES_SOLVER_HPP
#define LQGAMES_SOLVER_HPP

#include <string>
#include <vector>

#include "lqgames/recursion.hpp"

namespace lqgames {

// Reward-to-go of one player at one stage as a quadratic form over the
// extended public-private state z = [vhat; f_stack; 1].
struct QuadraticValue {
  MatrixXd sym_mat;
  double eval(const VectorXd& z) const { return z.dot(sym_mat * z); }
};

struct SolverOptions {
  double damping = 0.5;        // in (0, 1]
  double tol = 1e-9;           // sup-norm coefficient tolerance
  int max_outer_iters = 500;
  bool has_init = false;
  StrategyProfile init_profile;  // used when has_init
};

struct ConvergenceReport {
  int iterations = 0;
  double residual = 0.0;  // sup-norm distance between the returned profile and
                          // its own best response
  bool converged = false;
};

struct Equilibrium {
  StrategyProfile profile;
  PublicRecursion recursion;  // rebuilt for the returned profile
  std::vector<std::vector<QuadraticValue>> values;  // [player][stage]
  ConvergenceReport report;
};

// Expected stage reward of `player` when every player follows the given
// stage coefficients, as an exact quadratic over z = [vhat^player; f; 1].
// The hidden state and the others' estimates are integrated out against
// their conditional law given the player's state; the residual covariance
// contributes a constant in the corner entry.
MatrixXd stage_expected_reward(const GameSpec& spec, const PublicRecursion& rec, int player,
                               int stage, const std::vector<AffineStrategy>& stage_coeffs);

// Single-player best response at one stage given the other players' stage
// coefficients and the player's continuation value; also returns the
// resulting reward-to-go. The continuation at the last stage is zero.
std::pair<AffineStrategy, QuadraticValue> stage_best_response(
    const GameSpec& spec, const PublicRecursion& rec, int player, int stage,
    const QuadraticValue& continuation, const std::vector<AffineStrategy>& others);

// Backward pass over all stages: at each stage the first-order conditions of
// every player are stacked into one linear system and solved simultaneously.
// The covariance and cross-estimate data in `rec` are held fixed.
std::pair<StrategyProfile, std::vector<std::vector<QuadraticValue>>> backward_pass(
    const GameSpec& spec, const PublicRecursion& rec);

// Damped fixed-point iteration over profiles: rebuild the public recursion,
// run a backward pass, blend, and stop once the best response reproduces the
// profile within tolerance. Non-convergence is reported, not thrown.
Equilibrium solve_equilibrium(const GameSpec& spec, const SolverOptions& options = {});

}  // namespace lqgames

#endif
