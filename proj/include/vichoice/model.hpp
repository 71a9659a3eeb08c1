#pragma once

#include <cstddef>
#include <vector>

#include "vichoice/linalg.hpp"

namespace vichoice {

/// One observed choice: a J x K attribute matrix and the chosen row.
/// `choice` is 0-based in memory; the dataset file stores it 1-based.
struct ChoiceEvent {
  MatrixXd x;
  int choice = 0;
};

struct AgentData {
  std::vector<ChoiceEvent> events;

  std::size_t num_events() const { return events.size(); }
};

/// Observed data for H agents sharing the same item and attribute counts.
/// Validated on construction and immutable afterwards.
class ChoiceDataset {
 public:
  ChoiceDataset(int num_items, int num_attributes, std::vector<AgentData> agents);

  int num_items() const { return num_items_; }
  int num_attributes() const { return num_attributes_; }
  std::size_t num_agents() const { return agents_.size(); }
  std::size_t num_events() const;

  const AgentData& agent(std::size_t h) const { return agents_.at(h); }
  const std::vector<AgentData>& agents() const { return agents_; }

 private:
  int num_items_;
  int num_attributes_;
  std::vector<AgentData> agents_;
};

/// Population distribution of preference vectors, beta_h ~ N(zeta, omega).
struct PopulationParams {
  VectorXd zeta;
  MatrixXd omega;

  int dim() const { return static_cast<int>(zeta.size()); }

  // Checks shapes, symmetry (1e-12) and positive definiteness. With
  // `allow_singular` only positive semi-definiteness is required.
  void validate(bool allow_singular = false) const;
};

/// Conjugate hyperpriors: zeta ~ N(beta0, omega0), omega^-1 ~ Wishart(s_mat, nu).
struct Hyperpriors {
  VectorXd beta0;
  MatrixXd omega0;
  MatrixXd s_mat;
  double nu = 0.0;

  int dim() const { return static_cast<int>(beta0.size()); }
  void validate() const;

  /// beta0 = 0, omega0 = 100 I, nu = K + 3, S = nu I.
  static Hyperpriors diffuse(int num_attributes);
};

// Stabilized log(sum(exp(u))).
double log_sum_exp(const VectorXd& u);

// Stabilized softmax.
VectorXd softmax(const VectorXd& u);

/// Multinomial logit choice probabilities exp(x_j' beta) / sum_j' exp(x_j' beta).
VectorXd mnl_choice_prob(const MatrixXd& x, const VectorXd& beta);

/// Sum over events of log MNL probability of the chosen item.
double log_likelihood_agent(const AgentData& agent, const VectorXd& beta);

}  // namespace vichoice
