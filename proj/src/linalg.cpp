#include "lqgames/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace lqgames {

double max_asymmetry(const MatrixXd& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

MatrixXd pinv(const MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return MatrixXd(m.cols(), m.rows());
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  VectorXd inv_sv = VectorXd::Zero(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff && sv(k) > 0.0) inv_sv(k) = 1.0 / sv(k);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

double min_eigenvalue(const MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

MatrixXd psd_factor(const MatrixXd& sym) {
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  VectorXd lam = es.eigenvalues();
  for (Eigen::Index k = 0; k < lam.size(); ++k) lam(k) = std::sqrt(std::max(lam(k), 0.0));
  return es.eigenvectors() * lam.asDiagonal();
}

MatrixXd block_diag(const std::vector<MatrixXd>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  MatrixXd out = MatrixXd::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

namespace {
double pairwise_range(const std::vector<double>& xs, size_t lo, size_t hi) {
  const size_t n = hi - lo;
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (size_t k = lo; k < hi; ++k) s += xs[k];
    return s;
  }
  const size_t mid = lo + n / 2;
  return pairwise_range(xs, lo, mid) + pairwise_range(xs, mid, hi);
}
}  // namespace

double pairwise_sum(const std::vector<double>& xs) { return pairwise_range(xs, 0, xs.size()); }

}  // namespace lqgames
