#include "vichoice/inference_eb.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "vichoice/errors.hpp"

namespace vichoice {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

}  // namespace

AgentSubproblem::AgentSubproblem(const AgentData& agent, const AgentPrior& prior, LseApprox approx)
    : agent_(agent), prior_(prior), approx_(approx), dim_(static_cast<int>(prior.mean.size())) {}

double AgentSubproblem::operator()(const VectorXd& theta, VectorXd* grad) const {
  if (theta.size() != VariationalAgent::packed_size(dim_, approx_)) {
    throw DimensionError("packed agent parameters have the wrong length");
  }
  return approx_ == LseApprox::D0 ? value_d0(theta, grad) : value_d1(theta, grad);
}

double AgentSubproblem::value_d0(const VectorXd& theta, VectorXd* grad) const {
  const int k = dim_;
  const VectorXd mu = theta.head(k);
  const MatrixXd l = unvech(theta.tail(vech_size(k)), k);
  const VectorXd diag = l.diagonal();
  if ((diag.array() == 0.0).any()) return -std::numeric_limits<double>::infinity();

  const MatrixXd& prec = prior_.precision;
  const VectorXd d = mu - prior_.mean;
  const VectorXd pd = prec * d;
  const MatrixXd pl = prec * l;

  double value = 0.5 * (k * (kLog2Pi + 1.0)) + diag.array().abs().log().sum();
  value += prior_.log_norm - 0.5 * (pl.cwiseProduct(l).sum() + d.dot(pd));

  VectorXd g_mu = -pd;
  MatrixXd curvature_l = MatrixXd::Zero(k, k);  // sum_t x' diag(w) x L
  for (const auto& ev : agent_.events) {
    const MatrixXd xl = ev.x * l;
    const VectorXd u = ev.x * mu + 0.5 * xl.rowwise().squaredNorm();
    const double m = u.maxCoeff();
    const VectorXd e = (u.array() - m).exp();
    const double s = e.sum();
    const VectorXd w = e / s;
    value += ev.x.row(ev.choice).dot(mu) - (m + std::log(s));
    if (grad) {
      g_mu += ev.x.row(ev.choice).transpose() - ev.x.transpose() * w;
      curvature_l.noalias() += ev.x.transpose() * (w.asDiagonal() * xl);
    }
  }

  if (grad) {
    // Lower triangle of L^-T - (P + sum_t x' diag(w) x) L; the lower
    // triangle of L^-T is diag(1 / l_ii).
    MatrixXd g_l = -pl - curvature_l;
    g_l.diagonal() += diag.cwiseInverse();
    grad->resize(theta.size());
    grad->head(k) = g_mu;
    grad->tail(vech_size(k)) = vech(g_l);
  }
  return value;
}

double AgentSubproblem::value_d1(const VectorXd& theta, VectorXd* grad) const {
  const int k = dim_;
  const VectorXd mu = theta.head(k);
  const VectorXd log_var = theta.tail(k);
  const VectorXd v = log_var.array().exp();

  const MatrixXd& prec = prior_.precision;
  const VectorXd d = mu - prior_.mean;
  const VectorXd pd = prec * d;

  double value = 0.5 * (k * (kLog2Pi + 1.0) + log_var.sum());
  value += prior_.log_norm - 0.5 * (prec.diagonal().dot(v) + d.dot(pd));

  VectorXd g_mu = -pd;
  VectorXd g_sigma = 0.5 * (VectorXd::Ones(k) - prec.diagonal().cwiseProduct(v));
  for (const auto& ev : agent_.events) {
    const MatrixXd& x = ev.x;
    const VectorXd u = x * mu;
    const double m = u.maxCoeff();
    const VectorXd e = (u.array() - m).exp();
    const double s = e.sum();
    const VectorXd p = e / s;
    const VectorXd mean_x = x.transpose() * p;
    const VectorXd theta_diag = (x.rowwise() - mean_x.transpose()).cwiseAbs2().transpose() * p;
    value += u(ev.choice) - (m + std::log(s)) - 0.5 * theta_diag.dot(v);
    if (grad) {
      g_mu += x.row(ev.choice).transpose() - grad_expected_lse_d1_mu_var(mu, v, x);
      g_sigma -= 0.5 * theta_diag.cwiseProduct(v);
    }
  }

  if (grad) {
    grad->resize(2 * k);
    grad->head(k) = g_mu;
    grad->tail(k) = g_sigma;
  }
  return value;
}

MatrixXd agent_mu_hessian(const AgentData& agent, const AgentPrior& prior,
                          const VariationalAgent& q) {
  MatrixXd hess = -prior.precision;
  const MatrixXd l = q.approx == LseApprox::D0
                         ? MatrixXd(q.cov_factor.triangularView<Eigen::Lower>())
                         : MatrixXd::Zero(q.dim(), q.dim());
  for (const auto& ev : agent.events) {
    const VectorXd w = softmax_weights_factor(q.mu, l, ev.x);
    const VectorXd xw = ev.x.transpose() * w;
    hess -= ev.x.transpose() * w.asDiagonal() * ev.x - xw * xw.transpose();
  }
  return hess;
}

double pooled_log_likelihood(const ChoiceDataset& data, const VectorXd& beta, double ridge,
                             VectorXd* grad, MatrixXd* hess) {
  const int k = data.num_attributes();
  if (beta.size() != k) throw DimensionError("beta must have length K");
  double value = -0.5 * ridge * beta.squaredNorm();
  if (grad) *grad = -ridge * beta;
  if (hess) *hess = -ridge * MatrixXd::Identity(k, k);
  for (const auto& agent : data.agents()) {
    for (const auto& ev : agent.events) {
      const VectorXd u = ev.x * beta;
      const double lse = log_sum_exp(u);
      value += u(ev.choice) - lse;
      if (grad || hess) {
        const VectorXd p = (u.array() - lse).exp();
        const VectorXd xp = ev.x.transpose() * p;
        if (grad) *grad += ev.x.row(ev.choice).transpose() - xp;
        if (hess) *hess -= ev.x.transpose() * p.asDiagonal() * ev.x - xp * xp.transpose();
      }
    }
  }
  return value;
}

VectorXd init_homogeneous(const ChoiceDataset& data, const OptimizeSettings& settings, double ridge) {
  const int k = data.num_attributes();
  SmoothObjective obj;
  obj.value = [&](const VectorXd& b, VectorXd* g) {
    return pooled_log_likelihood(data, b, ridge, g, nullptr);
  };
  obj.hessian = [&](const VectorXd& b) {
    MatrixXd h;
    pooled_log_likelihood(data, b, ridge, nullptr, &h);
    return h;
  };
  const OptimizeResult res = maximize(obj, VectorXd::Zero(k), settings);
  if (res.status == OptimizeStatus::MaxIterations) {
    throw SeparationError("pooled MNL likelihood did not converge in " +
                          std::to_string(res.iterations) + " Newton iterations");
  }
  if (ridge == 0.0) {
    MatrixXd hess;
    pooled_log_likelihood(data, res.argmax, 0.0, nullptr, &hess);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(-hess, Eigen::EigenvaluesOnly);
    const double per_event = eig.eigenvalues().minCoeff() /
                             static_cast<double>(std::max<std::size_t>(1, data.num_events()));
    if (!(per_event > 1e-5)) {
      throw SeparationError("pooled MNL information matrix is numerically singular; "
                            "data appear separable");
    }
  }
  return res.argmax;
}

HomogeneousFit init_homogeneous_robust(const ChoiceDataset& data, const OptimizeSettings& settings) {
  try {
    return {init_homogeneous(data, settings, 0.0), false};
  } catch (const SeparationError&) {
  } catch (const OptimizerError&) {
  }
  return {init_homogeneous(data, settings, kInitRidge), true};
}

VariationalAgent update_agent(const AgentData& agent, const AgentPrior& prior,
                              const VariationalAgent& current, const OptimizeSettings& settings) {
  const int k = current.dim();
  const AgentSubproblem sub(agent, prior, current.approx);
  SmoothObjective obj;
  obj.value = [&sub](const VectorXd& theta, VectorXd* g) { return sub(theta, g); };
  const OptimizeResult res = maximize(obj, current.packed(), settings);
  VariationalAgent next = VariationalAgent::unpack(res.argmax, k, current.approx);
  if (next.approx == LseApprox::D0) {
    // L D with D = diag(+-1) leaves L L' unchanged.
    for (int j = 0; j < k; ++j) {
      if (next.cov_factor(j, j) < 0.0) next.cov_factor.col(j) *= -1.0;
    }
  }
  return next;
}

VariationalAgent estep_agent(const AgentData& agent, const PopulationParams& params,
                             const VariationalAgent& current, const OptimizeSettings& settings) {
  return update_agent(agent, eb_agent_prior(params), current, settings);
}

void update_all_agents(const ChoiceDataset& data, const AgentPrior& prior,
                       std::vector<VariationalAgent>& agents_var, const OptimizeSettings& settings) {
  const int H = static_cast<int>(data.num_agents());
  if (static_cast<int>(agents_var.size()) != H) throw DimensionError("one variational agent per agent required");
  std::vector<std::exception_ptr> errors(H);
#pragma omp parallel for schedule(dynamic, 4)
  for (int h = 0; h < H; ++h) {
    try {
      agents_var[h] = update_agent(data.agent(h), prior, agents_var[h], settings);
    } catch (...) {
      errors[h] = std::current_exception();
    }
  }
  for (int h = 0; h < H; ++h) {
    if (!errors[h]) continue;
    try {
      std::rethrow_exception(errors[h]);
    } catch (const std::exception& e) {
      throw OptimizerError("agent " + std::to_string(h) + ": " + e.what());
    }
  }
}

PopulationParams mstep(const std::vector<VariationalAgent>& agents_var) {
  const auto H = agents_var.size();
  if (H < 2) throw ValidationError("agents", "M-step needs at least 2 agents");
  const int k = agents_var.front().dim();
  PopulationParams p;
  p.zeta = VectorXd::Zero(k);
  for (const auto& q : agents_var) p.zeta += q.mu;
  p.zeta /= static_cast<double>(H);
  p.omega = MatrixXd::Zero(k, k);
  for (const auto& q : agents_var) {
    const VectorXd d = q.mu - p.zeta;
    p.omega += q.covariance() + d * d.transpose();
  }
  p.omega /= static_cast<double>(H);
  p.omega = 0.5 * (p.omega + p.omega.transpose());
  return p;
}

void EmSettings::validate() const {
  if (!(rel_tol > 0.0)) throw ValidationError("rel-tol", "must be positive");
  if (max_em_iters < 1) throw ValidationError("max_em_iters", "must be positive");
  if (!(init_variance > 0.0)) throw ValidationError("init_variance", "must be positive");
  inner.validate();
}

VectorXd eb_state_vector(const PopulationParams& params,
                         const std::vector<VariationalAgent>& agents_var) {
  const int k = params.dim();
  Eigen::Index n = k + vech_size(k);
  for (const auto& q : agents_var) n += VariationalAgent::packed_size(q.dim(), q.approx);
  VectorXd v(n);
  Eigen::Index pos = 0;
  v.segment(pos, k) = params.zeta;
  pos += k;
  v.segment(pos, vech_size(k)) = vech(params.omega);
  pos += vech_size(k);
  for (const auto& q : agents_var) {
    const VectorXd t = q.packed();
    v.segment(pos, t.size()) = t;
    pos += t.size();
  }
  return v;
}

EBFit fit_veb(const ChoiceDataset& data, LseApprox approx, const EmSettings& settings) {
  settings.validate();
  if (data.num_agents() < 2) throw ValidationError("agents", "empirical Bayes needs at least 2 agents");
  const int k = data.num_attributes();

  EBFit fit;
  fit.approx = approx;
  fit.init = init_homogeneous_robust(data, settings.inner);
  fit.agents_var.assign(data.num_agents(),
                        VariationalAgent::isotropic(fit.init.beta, settings.init_variance, approx));
  fit.params.zeta = fit.init.beta;
  fit.params.omega = MatrixXd::Identity(k, k);
  fit.elbo_trace.push_back(elbo_eb(fit.agents_var, fit.params, data, approx));

  for (int it = 1; it <= settings.max_em_iters; ++it) {
    const VectorXd before = eb_state_vector(fit.params, fit.agents_var);

    update_all_agents(data, eb_agent_prior(fit.params), fit.agents_var, settings.inner);
    fit.elbo_trace.push_back(elbo_eb(fit.agents_var, fit.params, data, approx));

    fit.params = mstep(fit.agents_var);
    fit.elbo_trace.push_back(elbo_eb(fit.agents_var, fit.params, data, approx));

    fit.em_iterations = it;
    const VectorXd after = eb_state_vector(fit.params, fit.agents_var);
    if ((after - before).norm() < settings.rel_tol * before.norm()) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

}  // namespace vichoice
