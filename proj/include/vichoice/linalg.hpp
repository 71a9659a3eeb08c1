#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace vichoice {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Lower Cholesky factor of a symmetric positive-definite matrix.
/// Throws NotPositiveDefinite (mentioning `what`) on failure.
MatrixXd cholesky_lower(const MatrixXd& a, std::string_view what = "matrix");

bool is_spd(const MatrixXd& a);

MatrixXd spd_inverse(const MatrixXd& a, std::string_view what = "matrix");

double spd_logdet(const MatrixXd& a, std::string_view what = "matrix");

/// Factor F with F F^T = a for a symmetric positive-semidefinite matrix.
/// Falls back to an eigen decomposition (negative eigenvalues clamped to
/// zero) when the Cholesky factorization fails, so singular inputs such as
/// the zero matrix are accepted.
MatrixXd psd_factor(const MatrixXd& a);

void require_square(const MatrixXd& a, std::string_view what);

void require_symmetric(const MatrixXd& a, double tol, std::string_view what);

bool all_finite(const MatrixXd& a);
bool all_finite(const VectorXd& v);

// Half-vectorization: lower triangle stacked column by column.
inline int vech_size(int k) { return k * (k + 1) / 2; }
VectorXd vech(const MatrixXd& a);
MatrixXd unvech(const Eigen::Ref<const VectorXd>& v, int k);

}  // namespace vichoice
