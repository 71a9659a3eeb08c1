#include "vichoice/model.hpp"

#include <cmath>
#include <string>

#include "vichoice/errors.hpp"

namespace vichoice {

ChoiceDataset::ChoiceDataset(int num_items, int num_attributes, std::vector<AgentData> agents)
    : num_items_(num_items), num_attributes_(num_attributes), agents_(std::move(agents)) {
  if (num_items_ < 2) throw ValidationError("J", "need at least 2 items");
  if (num_attributes_ < 1) throw ValidationError("K", "need at least 1 attribute");
  if (agents_.empty()) throw ValidationError("agents", "dataset has no agents");
  for (std::size_t h = 0; h < agents_.size(); ++h) {
    for (std::size_t t = 0; t < agents_[h].events.size(); ++t) {
      const auto& ev = agents_[h].events[t];
      const std::string where =
          "agent " + std::to_string(h) + " event " + std::to_string(t);
      if (ev.x.rows() != num_items_ || ev.x.cols() != num_attributes_) {
        throw DimensionError(where + ": x has shape " + std::to_string(ev.x.rows()) + "x" +
                             std::to_string(ev.x.cols()));
      }
      if (!ev.x.allFinite()) throw NonFiniteError(where + ": x has non-finite entries");
      if (ev.choice < 0 || ev.choice >= num_items_) {
        throw ValidationError("y", where + ": choice index out of range");
      }
    }
  }
}

std::size_t ChoiceDataset::num_events() const {
  std::size_t n = 0;
  for (const auto& a : agents_) n += a.events.size();
  return n;
}

void PopulationParams::validate(bool allow_singular) const {
  const auto k = zeta.size();
  if (k < 1) throw DimensionError("zeta is empty");
  if (omega.rows() != k || omega.cols() != k) {
    throw DimensionError("omega must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  if (!zeta.allFinite()) throw NonFiniteError("zeta has non-finite entries");
  require_symmetric(omega, 1e-12, "omega");
  if (allow_singular) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(omega, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, omega.cwiseAbs().maxCoeff())) {
      throw NotPositiveDefinite("omega is not positive semi-definite");
    }
  } else {
    cholesky_lower(omega, "omega");
  }
}

void Hyperpriors::validate() const {
  const auto k = beta0.size();
  if (k < 1) throw DimensionError("beta0 is empty");
  if (omega0.rows() != k || omega0.cols() != k || s_mat.rows() != k || s_mat.cols() != k) {
    throw DimensionError("hyperprior matrices must be KxK");
  }
  if (!(nu > static_cast<double>(k) - 1.0)) {
    throw ValidationError("nu", "must exceed K - 1");
  }
  require_symmetric(omega0, 1e-12, "omega0");
  require_symmetric(s_mat, 1e-12, "S");
  cholesky_lower(omega0, "omega0");
  cholesky_lower(s_mat, "S");
}

Hyperpriors Hyperpriors::diffuse(int num_attributes) {
  const int k = num_attributes;
  Hyperpriors hp;
  hp.beta0 = VectorXd::Zero(k);
  hp.omega0 = 100.0 * MatrixXd::Identity(k, k);
  hp.nu = k + 3.0;
  hp.s_mat = hp.nu * MatrixXd::Identity(k, k);
  return hp;
}

double log_sum_exp(const VectorXd& u) {
  const double m = u.maxCoeff();
  return m + std::log((u.array() - m).exp().sum());
}

VectorXd softmax(const VectorXd& u) {
  VectorXd e = (u.array() - u.maxCoeff()).exp();
  return e / e.sum();
}

VectorXd mnl_choice_prob(const MatrixXd& x, const VectorXd& beta) {
  if (x.cols() != beta.size()) {
    throw DimensionError("x has " + std::to_string(x.cols()) + " columns but beta has " +
                         std::to_string(beta.size()) + " entries");
  }
  if (!x.allFinite() || !beta.allFinite()) throw NonFiniteError("mnl_choice_prob: non-finite input");
  return softmax(x * beta);
}

double log_likelihood_agent(const AgentData& agent, const VectorXd& beta) {
  double ll = 0.0;
  for (const auto& ev : agent.events) {
    if (ev.x.cols() != beta.size()) throw DimensionError("log_likelihood_agent: shape mismatch");
    const VectorXd u = ev.x * beta;
    ll += u(ev.choice) - log_sum_exp(u);
  }
  return ll;
}

}  // namespace vichoice
