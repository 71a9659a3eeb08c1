#include "vichoice/linalg.hpp"

#include <cmath>
#include <string>

#include "vichoice/errors.hpp"

namespace vichoice {

void require_square(const MatrixXd& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_symmetric(const MatrixXd& a, double tol, std::string_view what) {
  require_square(a, what);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw NotPositiveDefinite(std::string(what) + " is not symmetric");
  }
}

MatrixXd cholesky_lower(const MatrixXd& a, std::string_view what) {
  require_square(a, what);
  if (!all_finite(a)) throw NonFiniteError(std::string(what) + " has non-finite entries");
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) + " is not positive definite");
  }
  MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) {
      throw NotPositiveDefinite(std::string(what) + " is not positive definite");
    }
  }
  return l;
}

bool is_spd(const MatrixXd& a) {
  if (a.rows() != a.cols() || !all_finite(a)) return false;
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixLLT().diagonal().array() > 0.0).all();
}

MatrixXd spd_inverse(const MatrixXd& a, std::string_view what) {
  const MatrixXd l = cholesky_lower(a, what);
  MatrixXd linv = l.triangularView<Eigen::Lower>().solve(
      MatrixXd::Identity(a.rows(), a.cols()));
  MatrixXd inv = linv.transpose() * linv;
  return 0.5 * (inv + inv.transpose());
}

double spd_logdet(const MatrixXd& a, std::string_view what) {
  const MatrixXd l = cholesky_lower(a, what);
  return 2.0 * l.diagonal().array().log().sum();
}

MatrixXd psd_factor(const MatrixXd& a) {
  require_square(a, "covariance");
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() == Eigen::Success &&
      (llt.matrixLLT().diagonal().array() > 0.0).all()) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (a + a.transpose()));
  const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

bool all_finite(const MatrixXd& a) { return a.allFinite(); }
bool all_finite(const VectorXd& v) { return v.allFinite(); }

VectorXd vech(const MatrixXd& a) {
  const int k = static_cast<int>(a.rows());
  VectorXd v(vech_size(k));
  int idx = 0;
  for (int j = 0; j < k; ++j) {
    for (int i = j; i < k; ++i) v(idx++) = a(i, j);
  }
  return v;
}

MatrixXd unvech(const Eigen::Ref<const VectorXd>& v, int k) {
  if (v.size() != vech_size(k)) {
    throw DimensionError("vech vector has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(vech_size(k)));
  }
  MatrixXd a = MatrixXd::Zero(k, k);
  int idx = 0;
  for (int j = 0; j < k; ++j) {
    for (int i = j; i < k; ++i) a(i, j) = v(idx++);
  }
  return a;
}

}  // namespace vichoice
