#include "vichoice/elbo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "vichoice/errors.hpp"

namespace vichoice {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

void check_agents(const std::vector<VariationalAgent>& agents_var, const ChoiceDataset& data,
                  LseApprox approx) {
  if (agents_var.size() != data.num_agents()) {
    throw DimensionError("have " + std::to_string(agents_var.size()) +
                         " variational agents for " + std::to_string(data.num_agents()) +
                         " agents");
  }
  for (const auto& q : agents_var) {
    if (q.approx != approx) throw DimensionError("variational agent uses a different approximation");
    if (q.dim() != data.num_attributes()) throw DimensionError("variational agent has wrong K");
  }
}

double sum_agent_terms(const std::vector<VariationalAgent>& agents_var, const AgentPrior& prior,
                       const ChoiceDataset& data) {
  const int H = static_cast<int>(data.num_agents());
  std::vector<double> terms(H);
#pragma omp parallel for schedule(static)
  for (int h = 0; h < H; ++h) terms[h] = agent_objective(data.agent(h), agents_var[h], prior);
  double total = 0.0;
  for (double t : terms) total += t;
  if (!std::isfinite(total)) throw NonFiniteError("objective is not finite");
  return total;
}

void check_wishart_domain(double dof, const MatrixXd& upsilon) {
  require_square(upsilon, "upsilon");
  const auto k = static_cast<double>(upsilon.rows());
  if (!(dof > k - 1.0)) {
    throw DomainError("Wishart degrees of freedom " + std::to_string(dof) + " must exceed K - 1");
  }
}

}  // namespace

VariationalAgent VariationalAgent::full(VectorXd mu, MatrixXd cov_factor) {
  VariationalAgent q;
  q.mu = std::move(mu);
  q.cov_factor = std::move(cov_factor);
  q.approx = LseApprox::D0;
  return q;
}

VariationalAgent VariationalAgent::diagonal(VectorXd mu, VectorXd log_var) {
  VariationalAgent q;
  q.mu = std::move(mu);
  q.log_var = std::move(log_var);
  q.approx = LseApprox::D1;
  return q;
}

VariationalAgent VariationalAgent::isotropic(const VectorXd& mu, double variance, LseApprox approx) {
  const auto k = mu.size();
  if (approx == LseApprox::D0) {
    return full(mu, std::sqrt(variance) * MatrixXd::Identity(k, k));
  }
  return diagonal(mu, VectorXd::Constant(k, std::log(variance)));
}

MatrixXd VariationalAgent::covariance() const {
  if (approx == LseApprox::D0) {
    const MatrixXd l = cov_factor.triangularView<Eigen::Lower>();
    return l * l.transpose();
  }
  return log_var.array().exp().matrix().asDiagonal();
}

double VariationalAgent::log_det_cov() const {
  if (approx == LseApprox::D0) return 2.0 * cov_factor.diagonal().array().abs().log().sum();
  return log_var.sum();
}

int VariationalAgent::packed_size(int dim, LseApprox approx) {
  return dim + (approx == LseApprox::D0 ? vech_size(dim) : dim);
}

VectorXd VariationalAgent::packed() const {
  const int k = dim();
  VectorXd theta(packed_size(k, approx));
  theta.head(k) = mu;
  if (approx == LseApprox::D0) {
    theta.tail(vech_size(k)) = vech(cov_factor);
  } else {
    theta.tail(k) = log_var;
  }
  return theta;
}

VariationalAgent VariationalAgent::unpack(const VectorXd& theta, int dim, LseApprox approx) {
  if (theta.size() != packed_size(dim, approx)) throw DimensionError("packed agent has wrong length");
  if (approx == LseApprox::D0) {
    return full(theta.head(dim), unvech(theta.tail(vech_size(dim)), dim));
  }
  return diagonal(theta.head(dim), theta.tail(dim));
}

void VariationalAgent::validate() const {
  const auto k = mu.size();
  if (!mu.allFinite()) throw NonFiniteError("variational mean is not finite");
  if (approx == LseApprox::D0) {
    if (cov_factor.rows() != k || cov_factor.cols() != k) throw DimensionError("factor must be KxK");
    if (!(cov_factor.diagonal().array() > 0.0).all()) {
      throw NotPositiveDefinite("covariance factor needs a positive diagonal");
    }
  } else {
    if (log_var.size() != k) throw DimensionError("log_var must have length K");
    if (!log_var.allFinite()) throw NonFiniteError("log_var is not finite");
  }
}

AgentPrior eb_agent_prior(const PopulationParams& params) {
  params.validate();
  const auto k = static_cast<double>(params.dim());
  AgentPrior prior;
  prior.mean = params.zeta;
  prior.precision = spd_inverse(params.omega, "omega");
  prior.log_norm = -0.5 * (k * kLog2Pi + spd_logdet(params.omega, "omega"));
  return prior;
}

double agent_objective(const AgentData& agent, const VariationalAgent& q, const AgentPrior& prior) {
  const int k = q.dim();
  const double entropy = 0.5 * (k * (kLog2Pi + 1.0) + q.log_det_cov());

  const VectorXd diff = q.mu - prior.mean;
  double trace_cov;
  if (q.approx == LseApprox::D0) {
    const MatrixXd l = q.cov_factor.triangularView<Eigen::Lower>();
    trace_cov = (prior.precision * l).cwiseProduct(l).sum();
  } else {
    trace_cov = prior.precision.diagonal().dot(q.log_var.array().exp().matrix());
  }
  const double prior_term = prior.log_norm - 0.5 * (trace_cov + diff.dot(prior.precision * diff));

  double lik = 0.0;
  if (q.approx == LseApprox::D0) {
    const MatrixXd l = q.cov_factor.triangularView<Eigen::Lower>();
    for (const auto& ev : agent.events) {
      lik += ev.x.row(ev.choice).dot(q.mu) - expected_lse_d0_factor(q.mu, l, ev.x);
    }
  } else {
    for (const auto& ev : agent.events) {
      lik += ev.x.row(ev.choice).dot(q.mu) - expected_lse_d1(q.mu, q.log_var, ev.x);
    }
  }
  return entropy + prior_term + lik;
}

double elbo_eb(const std::vector<VariationalAgent>& agents_var, const PopulationParams& params,
               const ChoiceDataset& data, LseApprox approx) {
  check_agents(agents_var, data, approx);
  return sum_agent_terms(agents_var, eb_agent_prior(params), data);
}

double wishart_elogdet(double omega_dof, const MatrixXd& upsilon) {
  check_wishart_domain(omega_dof, upsilon);
  const auto k = upsilon.rows();
  double value = k * std::numbers::ln2 + spd_logdet(upsilon, "upsilon");
  for (Eigen::Index i = 1; i <= k; ++i) {
    value += boost::math::digamma((omega_dof + 1.0 - static_cast<double>(i)) / 2.0);
  }
  return value;
}

double wishart_lognorm(double omega_dof, const MatrixXd& upsilon) {
  check_wishart_domain(omega_dof, upsilon);
  const auto k = static_cast<double>(upsilon.rows());
  double value = 0.5 * omega_dof * k * std::numbers::ln2 +
                 0.25 * k * (k - 1.0) * std::log(std::numbers::pi);
  for (int i = 1; i <= static_cast<int>(k); ++i) value += std::lgamma((omega_dof + 1.0 - i) / 2.0);
  return value + 0.5 * omega_dof * spd_logdet(upsilon, "upsilon");
}

void VariationalGlobal::validate() const {
  const auto k = mu_zeta.size();
  if (k < 1) throw DimensionError("mu_zeta is empty");
  if (sigma_zeta.rows() != k || sigma_zeta.cols() != k || upsilon.rows() != k ||
      upsilon.cols() != k) {
    throw DimensionError("global variational matrices must be KxK");
  }
  cholesky_lower(sigma_zeta, "sigma_zeta");
  cholesky_lower(upsilon, "upsilon");
  if (!(omega_dof > static_cast<double>(k) - 1.0)) throw DomainError("omega_dof must exceed K - 1");
}

AgentPrior hb_agent_prior(const VariationalGlobal& global) {
  const auto k = static_cast<double>(global.dim());
  AgentPrior prior;
  prior.mean = global.mu_zeta;
  prior.precision = global.omega_dof * global.upsilon;
  // E log N(beta | zeta, Omega) also averages over zeta, which adds
  // -omega/2 tr(upsilon sigma_zeta) per agent.
  prior.log_norm = -0.5 * (k * kLog2Pi - wishart_elogdet(global.omega_dof, global.upsilon)) -
                   0.5 * global.omega_dof * (global.upsilon * global.sigma_zeta).trace();
  return prior;
}

HbGlobalTerms hb_global_terms(const VariationalGlobal& global, const Hyperpriors& hyper) {
  const int k = global.dim();
  const double kd = k;
  const double dof = global.omega_dof;
  const double elogdet = wishart_elogdet(dof, global.upsilon);

  HbGlobalTerms terms{};
  terms.zeta_entropy = 0.5 * (kd * (kLog2Pi + 1.0) + spd_logdet(global.sigma_zeta, "sigma_zeta"));
  terms.omega_entropy =
      -0.5 * (dof - kd - 1.0) * elogdet + 0.5 * dof * kd + wishart_lognorm(dof, global.upsilon);

  const MatrixXd omega0_inv = spd_inverse(hyper.omega0, "omega0");
  const VectorXd d = global.mu_zeta - hyper.beta0;
  terms.zeta_cross =
      -0.5 * (kd * kLog2Pi + spd_logdet(hyper.omega0, "omega0") +
              (omega0_inv * (global.sigma_zeta + d * d.transpose())).trace());

  const MatrixXd s_inv = spd_inverse(hyper.s_mat, "S");
  terms.omega_cross = -wishart_lognorm(hyper.nu, hyper.s_mat) +
                      0.5 * (hyper.nu - kd - 1.0) * elogdet -
                      0.5 * dof * (s_inv * global.upsilon).trace();
  return terms;
}

double elbo_hb(const std::vector<VariationalAgent>& agents_var, const VariationalGlobal& global,
               const Hyperpriors& hyper, const ChoiceDataset& data, LseApprox approx) {
  global.validate();
  hyper.validate();
  if (global.dim() != data.num_attributes() || hyper.dim() != data.num_attributes()) {
    throw DimensionError("global factors do not match K");
  }
  check_agents(agents_var, data, approx);
  return sum_agent_terms(agents_var, hb_agent_prior(global), data) +
         hb_global_terms(global, hyper).total();
}

}  // namespace vichoice
