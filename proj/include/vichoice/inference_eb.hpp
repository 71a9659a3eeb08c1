#pragma once

#include <vector>

#include "vichoice/elbo.hpp"
#include "vichoice/optimizer.hpp"

namespace vichoice {

/// The per-agent coordinate-ascent problem in packed coordinates
/// ([mu; vech L] under D0, [mu; log_var] under D1). Its value equals
/// agent_objective() for the unpacked agent; gradients are analytic.
class AgentSubproblem {
 public:
  AgentSubproblem(const AgentData& agent, const AgentPrior& prior, LseApprox approx);

  double operator()(const VectorXd& theta, VectorXd* grad) const;

  int dim() const { return dim_; }
  LseApprox approx() const { return approx_; }

 private:
  double value_d0(const VectorXd& theta, VectorXd* grad) const;
  double value_d1(const VectorXd& theta, VectorXd* grad) const;

  const AgentData& agent_;
  const AgentPrior& prior_;
  LseApprox approx_;
  int dim_;
};

/// Analytic Hessian of the agent objective with respect to mu:
///   -P - sum_t [x' diag(w) x - (x'w)(x'w)'],  w = softmax_weights(mu, Sigma, x_t).
/// Exact for D0; under D1 it is the Hessian with the Theta correction dropped.
MatrixXd agent_mu_hessian(const AgentData& agent, const AgentPrior& prior,
                          const VariationalAgent& q);

// Pooled MNL log-likelihood with one shared beta, minus ridge/2 ||beta||^2.
double pooled_log_likelihood(const ChoiceDataset& data, const VectorXd& beta, double ridge,
                             VectorXd* grad = nullptr, MatrixXd* hess = nullptr);

/// Newton maximization of the pooled log-likelihood. Throws SeparationError
/// when the maximizer is not attained (non-convergence, or a numerically
/// singular information matrix at the returned point, which happens when the
/// data are (quasi-)separable and the iterates run off to infinity).
VectorXd init_homogeneous(const ChoiceDataset& data, const OptimizeSettings& settings = {},
                          double ridge = 0.0);

struct HomogeneousFit {
  VectorXd beta;
  bool ridge_used = false;
};

inline constexpr double kInitRidge = 1e-4;

/// init_homogeneous, falling back to the ridge-stabilized objective
/// (ridge = kInitRidge) on separation.
HomogeneousFit init_homogeneous_robust(const ChoiceDataset& data,
                                       const OptimizeSettings& settings = {});

/// One coordinate-ascent update of q(beta_h) given the prior, started from
/// `current`. The approximation is taken from `current`. The result never
/// has a lower agent_objective than `current`; D0 factors are returned with
/// a positive diagonal.
VariationalAgent update_agent(const AgentData& agent, const AgentPrior& prior,
                              const VariationalAgent& current, const OptimizeSettings& settings);

VariationalAgent estep_agent(const AgentData& agent, const PopulationParams& params,
                             const VariationalAgent& current, const OptimizeSettings& settings = {});

/// Updates every agent against the same prior. Agents are independent and
/// are processed in parallel; errors are rethrown with the lowest failing
/// agent index attached.
void update_all_agents(const ChoiceDataset& data, const AgentPrior& prior,
                       std::vector<VariationalAgent>& agents_var, const OptimizeSettings& settings);

/// Closed-form maximizer of the objective over (zeta, Omega):
/// zeta = mean(mu_h), Omega = mean(Sigma_h) + Cov(mu) with denominator H.
PopulationParams mstep(const std::vector<VariationalAgent>& agents_var);

struct EmSettings {
  double rel_tol = 1e-4;
  int max_em_iters = 500;
  double init_variance = 0.01;
  OptimizeSettings inner;

  void validate() const;
};

struct EBFit {
  PopulationParams params;
  std::vector<VariationalAgent> agents_var;
  std::vector<double> elbo_trace;  // initial value, then after every E- and M-step
  int em_iterations = 0;
  bool converged = false;
  LseApprox approx = LseApprox::D1;
  HomogeneousFit init;
};

/// Concatenation used by the convergence test: zeta, vech(Omega), and every
/// agent's packed parameters in agent order.
VectorXd eb_state_vector(const PopulationParams& params, const std::vector<VariationalAgent>& agents_var);

/// Variational EM for empirical Bayes. Starts from mu_h = zeta = pooled MLE,
/// Sigma_h = init_variance I, Omega = I; stops when the joint parameter
/// vector moves by less than rel_tol times its norm at the start of the
/// iteration.
EBFit fit_veb(const ChoiceDataset& data, LseApprox approx, const EmSettings& settings = {});

}  // namespace vichoice
