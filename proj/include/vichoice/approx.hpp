#pragma once

#include <string_view>

#include "vichoice/linalg.hpp"

// Approximations to E_q log sum_j exp(x_j' beta) for beta ~ N(mu, Sigma).
//
// D0 replaces the expectation with log E sum_j exp(.), i.e. the lognormal
// mean inside the log. It is an upper bound on the expected log-sum-exp, so
// the resulting ELBO stays a lower bound on the marginal likelihood.
//
// D1 is the first-order delta method around mu for a diagonal covariance
// Sigma = diag(exp(log_var)):
//   lse(x mu) + 1/2 Theta(mu)' exp(log_var),
// with Theta(mu) the diagonal of the Hessian of v -> lse(x v) at mu.

namespace vichoice {

enum class LseApprox { D0, D1 };

std::string_view to_string(LseApprox approx);
LseApprox parse_lse_approx(std::string_view text);

/// Normalized weights w_j proportional to exp(x_j' mu + x_j' Sigma x_j / 2).
/// Sigma must be symmetric PSD (checked by Cholesky of Sigma + jitter).
VectorXd softmax_weights(const VectorXd& mu, const MatrixXd& sigma_mat, const MatrixXd& x);

/// Same weights with Sigma = L L'; the quadratic form is ||L' x_j||^2.
VectorXd softmax_weights_factor(const VectorXd& mu, const MatrixXd& factor, const MatrixXd& x);

double expected_lse_d0(const VectorXd& mu, const MatrixXd& sigma_mat, const MatrixXd& x);
double expected_lse_d0_factor(const VectorXd& mu, const MatrixXd& factor, const MatrixXd& x);

/// Theta(mu)_k = sum_j p_j x_jk^2 - (sum_j p_j x_jk)^2 with p = softmax(x mu),
/// evaluated in the centred form sum_j p_j (x_jk - m_k)^2.
VectorXd theta_diag(const VectorXd& mu, const MatrixXd& x);

double expected_lse_d1(const VectorXd& mu, const VectorXd& log_var, const MatrixXd& x);
VectorXd grad_expected_lse_d1_mu(const VectorXd& mu, const VectorXd& log_var, const MatrixXd& x);
VectorXd grad_expected_lse_d1_sigma(const VectorXd& mu, const VectorXd& log_var, const MatrixXd& x);

// Variants taking the variances exp(log_var) directly. Zero variances are
// allowed here, which the log-variance API cannot express.
double expected_lse_d1_var(const VectorXd& mu, const VectorXd& variances, const MatrixXd& x);
VectorXd grad_expected_lse_d1_mu_var(const VectorXd& mu, const VectorXd& variances,
                                     const MatrixXd& x);

}  // namespace vichoice
