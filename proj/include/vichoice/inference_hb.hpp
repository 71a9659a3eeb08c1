#pragma once

#include <vector>

#include "vichoice/elbo.hpp"
#include "vichoice/inference_eb.hpp"

namespace vichoice {

/// (Omega0^-1 + H omega Upsilon)^-1 (Omega0^-1 beta0 + omega Upsilon sum_h mu_h).
VectorXd update_mu_zeta(const Hyperpriors& hyper, const VariationalGlobal& global,
                        const std::vector<VectorXd>& mu_list);

/// (Omega0^-1 + H omega Upsilon)^-1.
MatrixXd update_sigma_zeta(const Hyperpriors& hyper, const VariationalGlobal& global,
                           std::size_t num_agents);

/// Wishart degrees of freedom nu + H. Fixed for the whole fit.
double compute_omega(double nu, std::size_t num_agents);

/// (S^-1 + sum_h [Sigma_h + (mu_zeta - mu_h)(mu_zeta - mu_h)'] + H Sigma_zeta)^-1.
MatrixXd update_upsilon(const Hyperpriors& hyper, const VariationalGlobal& global,
                        const std::vector<VariationalAgent>& agents_var);

/// Agent update under the expected prior: Omega^-1 -> omega Upsilon,
/// zeta -> mu_zeta.
VariationalAgent estep_agent_hb(const AgentData& agent, const VariationalGlobal& global,
                                const VariationalAgent& current,
                                const OptimizeSettings& settings = {});

namespace detail {

// Precision-form updates. Tests use these to reach limits (a zero prior
// precision) that Hyperpriors cannot represent.
VectorXd zeta_mean_update(const MatrixXd& prior_precision, const VectorXd& prior_mean,
                          const MatrixXd& agent_precision, const std::vector<VectorXd>& mu_list);
MatrixXd zeta_cov_update(const MatrixXd& prior_precision, const MatrixXd& agent_precision,
                         std::size_t num_agents);

}  // namespace detail

struct HbSettings {
  double rel_tol = 1e-4;
  int max_iters = 500;
  double init_variance = 0.01;
  OptimizeSettings inner;

  void validate() const;
};

struct HBFit {
  VariationalGlobal global_var;
  std::vector<VariationalAgent> agents_var;
  std::vector<double> elbo_trace;  // initial value, then after each block update
  int iterations = 0;
  bool converged = false;
  LseApprox approx = LseApprox::D1;
  HomogeneousFit init;
};

/// mu_zeta, vech(Sigma_zeta), vech(Upsilon), then every agent's packed parameters.
VectorXd hb_state_vector(const VariationalGlobal& global, const std::vector<VariationalAgent>& agents_var);

/// Mean-field coordinate ascent for the hierarchical model. Each sweep
/// updates all agents, then mu_zeta, Sigma_zeta and Upsilon; omega stays at
/// nu + H. Initialization: mu_h = mu_zeta = pooled MLE,
/// Sigma_h = init_variance I, Sigma_zeta = I, Upsilon = I / omega.
HBFit fit_vb(const ChoiceDataset& data, const Hyperpriors& hyper, LseApprox approx,
             const HbSettings& settings = {});

}  // namespace vichoice
