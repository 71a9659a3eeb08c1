#include "vichoice/inference_hb.hpp"

#include <string>

#include "vichoice/errors.hpp"

namespace vichoice {

namespace detail {

MatrixXd zeta_cov_update(const MatrixXd& prior_precision, const MatrixXd& agent_precision,
                         std::size_t num_agents) {
  const MatrixXd precision = prior_precision + static_cast<double>(num_agents) * agent_precision;
  return spd_inverse(0.5 * (precision + precision.transpose()), "zeta precision");
}

VectorXd zeta_mean_update(const MatrixXd& prior_precision, const VectorXd& prior_mean,
                          const MatrixXd& agent_precision, const std::vector<VectorXd>& mu_list) {
  VectorXd mu_sum = VectorXd::Zero(prior_mean.size());
  for (const auto& mu : mu_list) mu_sum += mu;
  const MatrixXd precision =
      prior_precision + static_cast<double>(mu_list.size()) * agent_precision;
  const VectorXd rhs = prior_precision * prior_mean + agent_precision * mu_sum;
  Eigen::LLT<MatrixXd> llt(0.5 * (precision + precision.transpose()));
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("zeta precision is not positive definite");
  return llt.solve(rhs);
}

}  // namespace detail

VectorXd update_mu_zeta(const Hyperpriors& hyper, const VariationalGlobal& global,
                        const std::vector<VectorXd>& mu_list) {
  return detail::zeta_mean_update(spd_inverse(hyper.omega0, "omega0"), hyper.beta0,
                                  global.omega_dof * global.upsilon, mu_list);
}

MatrixXd update_sigma_zeta(const Hyperpriors& hyper, const VariationalGlobal& global,
                           std::size_t num_agents) {
  return detail::zeta_cov_update(spd_inverse(hyper.omega0, "omega0"),
                                 global.omega_dof * global.upsilon, num_agents);
}

double compute_omega(double nu, std::size_t num_agents) {
  return nu + static_cast<double>(num_agents);
}

MatrixXd update_upsilon(const Hyperpriors& hyper, const VariationalGlobal& global,
                        const std::vector<VariationalAgent>& agents_var) {
  MatrixXd scatter = spd_inverse(hyper.s_mat, "S");
  for (const auto& q : agents_var) {
    const VectorXd d = global.mu_zeta - q.mu;
    scatter += q.covariance() + d * d.transpose();
  }
  scatter += static_cast<double>(agents_var.size()) * global.sigma_zeta;
  return spd_inverse(0.5 * (scatter + scatter.transpose()), "upsilon scatter");
}

VariationalAgent estep_agent_hb(const AgentData& agent, const VariationalGlobal& global,
                                const VariationalAgent& current, const OptimizeSettings& settings) {
  return update_agent(agent, hb_agent_prior(global), current, settings);
}

void HbSettings::validate() const {
  if (!(rel_tol > 0.0)) throw ValidationError("rel-tol", "must be positive");
  if (max_iters < 1) throw ValidationError("max_iters", "must be positive");
  if (!(init_variance > 0.0)) throw ValidationError("init_variance", "must be positive");
  inner.validate();
}

VectorXd hb_state_vector(const VariationalGlobal& global,
                         const std::vector<VariationalAgent>& agents_var) {
  const int k = global.dim();
  Eigen::Index n = k + 2 * vech_size(k);
  for (const auto& q : agents_var) n += VariationalAgent::packed_size(q.dim(), q.approx);
  VectorXd v(n);
  Eigen::Index pos = 0;
  v.segment(pos, k) = global.mu_zeta;
  pos += k;
  v.segment(pos, vech_size(k)) = vech(global.sigma_zeta);
  pos += vech_size(k);
  v.segment(pos, vech_size(k)) = vech(global.upsilon);
  pos += vech_size(k);
  for (const auto& q : agents_var) {
    const VectorXd t = q.packed();
    v.segment(pos, t.size()) = t;
    pos += t.size();
  }
  return v;
}

HBFit fit_vb(const ChoiceDataset& data, const Hyperpriors& hyper, LseApprox approx,
             const HbSettings& settings) {
  settings.validate();
  hyper.validate();
  const int k = data.num_attributes();
  if (hyper.dim() != k) throw DimensionError("hyperpriors do not match K");
  const std::size_t H = data.num_agents();

  HBFit fit;
  fit.approx = approx;
  fit.init = init_homogeneous_robust(data, settings.inner);
  fit.agents_var.assign(H, VariationalAgent::isotropic(fit.init.beta, settings.init_variance, approx));
  auto& g = fit.global_var;
  g.omega_dof = compute_omega(hyper.nu, H);
  g.mu_zeta = fit.init.beta;
  g.sigma_zeta = MatrixXd::Identity(k, k);
  g.upsilon = MatrixXd::Identity(k, k) / g.omega_dof;

  auto objective = [&] { return elbo_hb(fit.agents_var, g, hyper, data, approx); };
  fit.elbo_trace.push_back(objective());

  std::vector<VectorXd> mus(H);
  for (int it = 1; it <= settings.max_iters; ++it) {
    const VectorXd before = hb_state_vector(g, fit.agents_var);

    update_all_agents(data, hb_agent_prior(g), fit.agents_var, settings.inner);
    fit.elbo_trace.push_back(objective());

    for (std::size_t h = 0; h < H; ++h) mus[h] = fit.agents_var[h].mu;
    g.mu_zeta = update_mu_zeta(hyper, g, mus);
    fit.elbo_trace.push_back(objective());

    g.sigma_zeta = update_sigma_zeta(hyper, g, H);
    fit.elbo_trace.push_back(objective());

    g.upsilon = update_upsilon(hyper, g, fit.agents_var);
    fit.elbo_trace.push_back(objective());

    fit.iterations = it;
    const VectorXd after = hb_state_vector(g, fit.agents_var);
    if ((after - before).norm() < settings.rel_tol * before.norm()) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

}  // namespace vichoice
