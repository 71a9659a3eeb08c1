#include "vichoice/approx.hpp"

#include <cmath>
#include <string>

#include "vichoice/errors.hpp"
#include "vichoice/model.hpp"

namespace vichoice {

namespace {

void check_shapes(const VectorXd& mu, const MatrixXd& x) {
  if (x.cols() != mu.size()) {
    throw DimensionError("x has " + std::to_string(x.cols()) + " columns, mu has " +
                         std::to_string(mu.size()) + " entries");
  }
}

void check_psd(const MatrixXd& sigma_mat, Eigen::Index k) {
  if (sigma_mat.rows() != k || sigma_mat.cols() != k) throw DimensionError("Sigma must be KxK");
  require_symmetric(sigma_mat, 1e-10, "Sigma");
  const double jitter = 1e-10 * std::max(1.0, sigma_mat.diagonal().cwiseAbs().maxCoeff());
  Eigen::LLT<MatrixXd> llt(sigma_mat + jitter * MatrixXd::Identity(k, k));
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Sigma is not positive semi-definite");
}

VectorXd d0_utilities(const VectorXd& mu, const MatrixXd& sigma_mat, const MatrixXd& x) {
  return x * mu + 0.5 * (x * sigma_mat).cwiseProduct(x).rowwise().sum();
}

VectorXd d0_utilities_factor(const VectorXd& mu, const MatrixXd& factor, const MatrixXd& x) {
  return x * mu + 0.5 * (x * factor).rowwise().squaredNorm();
}

}  // namespace

std::string_view to_string(LseApprox approx) { return approx == LseApprox::D0 ? "d0" : "d1"; }

LseApprox parse_lse_approx(std::string_view text) {
  if (text == "d0" || text == "D0") return LseApprox::D0;
  if (text == "d1" || text == "D1") return LseApprox::D1;
  throw ValidationError("approx", "expected 'd0' or 'd1', got '" + std::string(text) + "'");
}

VectorXd softmax_weights(const VectorXd& mu, const MatrixXd& sigma_mat, const MatrixXd& x) {
  check_shapes(mu, x);
  check_psd(sigma_mat, mu.size());
  return softmax(d0_utilities(mu, sigma_mat, x));
}

VectorXd softmax_weights_factor(const VectorXd& mu, const MatrixXd& factor, const MatrixXd& x) {
  check_shapes(mu, x);
  return softmax(d0_utilities_factor(mu, factor, x));
}

double expected_lse_d0(const VectorXd& mu, const MatrixXd& sigma_mat, const MatrixXd& x) {
  check_shapes(mu, x);
  check_psd(sigma_mat, mu.size());
  return log_sum_exp(d0_utilities(mu, sigma_mat, x));
}

double expected_lse_d0_factor(const VectorXd& mu, const MatrixXd& factor, const MatrixXd& x) {
  check_shapes(mu, x);
  return log_sum_exp(d0_utilities_factor(mu, factor, x));
}

VectorXd theta_diag(const VectorXd& mu, const MatrixXd& x) {
  check_shapes(mu, x);
  const VectorXd p = softmax(x * mu);
  const VectorXd m = x.transpose() * p;
  const MatrixXd centred = x.rowwise() - m.transpose();
  return centred.cwiseAbs2().transpose() * p;
}

double expected_lse_d1_var(const VectorXd& mu, const VectorXd& variances, const MatrixXd& x) {
  check_shapes(mu, x);
  if (variances.size() != mu.size()) throw DimensionError("variance vector must have length K");
  return log_sum_exp(x * mu) + 0.5 * theta_diag(mu, x).dot(variances);
}

double expected_lse_d1(const VectorXd& mu, const VectorXd& log_var, const MatrixXd& x) {
  return expected_lse_d1_var(mu, log_var.array().exp().matrix(), x);
}

VectorXd grad_expected_lse_d1_mu_var(const VectorXd& mu, const VectorXd& variances,
                                     const MatrixXd& x) {
  check_shapes(mu, x);
  if (variances.size() != mu.size()) throw DimensionError("variance vector must have length K");
  // Closed form in terms of e = exp(x mu) and s = 1'e, rewritten with
  // p = e / s and m = x'p so that every factor stays bounded:
  //   x'p + 1/2 x'[(diag(p) - p p')(x.x) v + 2 p (m.m)'v - 2 diag(p) x diag(m) v]
  const VectorXd p = softmax(x * mu);
  const VectorXd m = x.transpose() * p;
  const VectorXd sq_term = x.cwiseAbs2() * variances;          // (x.x) v
  const VectorXd cross_term = x * m.cwiseProduct(variances);   // x diag(m) v
  const double mm_v = m.cwiseAbs2().dot(variances);            // (m.m)' v
  VectorXd inner = p.cwiseProduct(sq_term) - p * p.dot(sq_term);
  inner += 2.0 * (p * mm_v - p.cwiseProduct(cross_term));
  return x.transpose() * p + 0.5 * (x.transpose() * inner);
}

VectorXd grad_expected_lse_d1_mu(const VectorXd& mu, const VectorXd& log_var, const MatrixXd& x) {
  return grad_expected_lse_d1_mu_var(mu, log_var.array().exp().matrix(), x);
}

VectorXd grad_expected_lse_d1_sigma(const VectorXd& mu, const VectorXd& log_var,
                                    const MatrixXd& x) {
  if (log_var.size() != mu.size()) throw DimensionError("log_var must have length K");
  return 0.5 * theta_diag(mu, x).cwiseProduct(log_var.array().exp().matrix());
}

}  // namespace vichoice
