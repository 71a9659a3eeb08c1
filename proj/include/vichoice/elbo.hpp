#pragma once

#include <vector>

#include "vichoice/approx.hpp"
#include "vichoice/model.hpp"

namespace vichoice {

/// Gaussian factor q(beta_h) = N(mu, Sigma_h).
///
/// Under D0 the covariance is carried as its lower Cholesky factor
/// (`cov_factor`, positive diagonal). Under D1 it is diagonal and carried as
/// log variances (`log_var`). Only the member matching `approx` is used.
struct VariationalAgent {
  VectorXd mu;
  MatrixXd cov_factor;
  VectorXd log_var;
  LseApprox approx = LseApprox::D1;

  static VariationalAgent full(VectorXd mu, MatrixXd cov_factor);
  static VariationalAgent diagonal(VectorXd mu, VectorXd log_var);
  /// Isotropic start Sigma = variance * I in the representation of `approx`.
  static VariationalAgent isotropic(const VectorXd& mu, double variance, LseApprox approx);

  int dim() const { return static_cast<int>(mu.size()); }
  MatrixXd covariance() const;
  double log_det_cov() const;

  /// [mu; vech(L)] under D0, [mu; log_var] under D1.
  VectorXd packed() const;
  static VariationalAgent unpack(const VectorXd& theta, int dim, LseApprox approx);
  static int packed_size(int dim, LseApprox approx);

  void validate() const;
};

/// Expected log prior density of one agent, written as
///   log_norm - 1/2 tr(precision (Sigma_h + (mu_h - mean)(mu_h - mean)')).
/// Empirical Bayes uses precision = Omega^-1 and
/// log_norm = -1/2 log((2 pi)^K |Omega|). The hierarchical model substitutes
/// the variational expectations of zeta and Omega^-1.
struct AgentPrior {
  VectorXd mean;
  MatrixXd precision;
  double log_norm = 0.0;
};

AgentPrior eb_agent_prior(const PopulationParams& params);

/// Contribution of one agent to the approximate ELBO: Gaussian entropy,
/// expected log prior and the approximated expected log-likelihood.
double agent_objective(const AgentData& agent, const VariationalAgent& q, const AgentPrior& prior);

/// Empirical Bayes objective. Per-agent terms are summed in agent order.
double elbo_eb(const std::vector<VariationalAgent>& agents_var, const PopulationParams& params,
               const ChoiceDataset& data, LseApprox approx);

/// E log|C| for C ~ Wishart(upsilon, dof):
///   log(2^K |upsilon|) + sum_i digamma((dof + 1 - i) / 2).
double wishart_elogdet(double omega_dof, const MatrixXd& upsilon);

/// Log normalizer of Wishart(upsilon, dof):
///   log[2^{dof K/2} pi^{K(K-1)/4} prod_i Gamma((dof + 1 - i)/2)] + dof/2 log|upsilon|.
double wishart_lognorm(double omega_dof, const MatrixXd& upsilon);

/// Variational factors for (zeta, Omega) in the hierarchical model:
/// zeta ~ N(mu_zeta, sigma_zeta), Omega^-1 ~ Wishart(upsilon, omega_dof).
struct VariationalGlobal {
  VectorXd mu_zeta;
  MatrixXd sigma_zeta;
  MatrixXd upsilon;
  double omega_dof = 0.0;

  int dim() const { return static_cast<int>(mu_zeta.size()); }
  void validate() const;
};

AgentPrior hb_agent_prior(const VariationalGlobal& global);

/// The four global-only pieces of the hierarchical objective.
struct HbGlobalTerms {
  double zeta_entropy;
  double omega_entropy;
  double zeta_cross;   // E_q log p(zeta | beta0, omega0)
  double omega_cross;  // E_q log p(Omega | S, nu)

  double total() const { return zeta_entropy + omega_entropy + zeta_cross + omega_cross; }
};

HbGlobalTerms hb_global_terms(const VariationalGlobal& global, const Hyperpriors& hyper);

/// Hierarchical Bayes objective: agent terms under hb_agent_prior plus
/// the global entropies and hyperprior cross-entropies.
double elbo_hb(const std::vector<VariationalAgent>& agents_var, const VariationalGlobal& global,
               const Hyperpriors& hyper, const ChoiceDataset& data, LseApprox approx);

}  // namespace vichoice
