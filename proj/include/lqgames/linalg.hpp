#ifndef LQGAMES_LINALG_HPP
#define LQGAMES_LINALG_HPP

#include <Eigen/Dense>
#include <vector>

namespace lqgames {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double max_asymmetry(const MatrixXd& m);

// Moore-Penrose inverse; singular values below rel_tol * s_max are truncated.
MatrixXd pinv(const MatrixXd& m, double rel_tol = 1e-10);

// smallest eigenvalue of a symmetric matrix
double min_eigenvalue(const MatrixXd& sym);
double max_eigenvalue(const MatrixXd& sym);

// factor F with F F' = m for symmetric PSD m; negative ripples are clamped
MatrixXd psd_factor(const MatrixXd& sym);

MatrixXd block_diag(const std::vector<MatrixXd>& blocks);

// numerically stable pairwise (cascade) summation; order-independent given
// a fixed element order
double pairwise_sum(const std::vector<double>& xs);

}  // namespace lqgames

#endif
