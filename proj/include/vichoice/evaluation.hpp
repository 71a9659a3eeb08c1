#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "vichoice/elbo.hpp"
#include "vichoice/model.hpp"

namespace vichoice {

/// Monte-Carlo estimate of a choice distribution with per-component
/// standard errors.
struct ChoiceEstimate {
  VectorXd probs;
  VectorXd std_error;
  int ndraws = 0;
};

// Draws per Monte-Carlo chunk. Chunk c uses make_stream(seed,
// kPredictiveChunk, c) and chunk sums are reduced in chunk order, so results
// do not depend on the number of threads.
inline constexpr int kDrawsPerChunk = 4096;

/// Average of mnl_choice_prob(x_new, beta) over beta ~ N(zeta, omega).
/// omega may be singular.
ChoiceEstimate predictive_choice(const PopulationParams& params, const MatrixXd& x_new, int ndraws,
                                 std::uint64_t seed);

/// Average of mnl_choice_prob(x_new, beta) over zeta ~ N(mu_zeta, sigma_zeta),
/// Omega^-1 ~ Wishart(upsilon, omega_dof), beta ~ N(zeta, Omega), one beta
/// per (zeta, Omega) draw. Wishart draws use the Bartlett decomposition.
ChoiceEstimate posterior_predictive_choice(const VariationalGlobal& global, const MatrixXd& x_new,
                                           int ndraws, std::uint64_t seed);

/// Total variation distance in percentage points, 100 * sum_j |p_j - q_j| / 2.
double tv_error(const VectorXd& p, const VectorXd& q);

/// A fitted method as consumed by the benchmark: point estimates of the
/// population (VEB) or the variational posterior over it (VB).
struct MethodEstimate {
  std::string name;
  std::variant<PopulationParams, VariationalGlobal> fit;
};

ChoiceEstimate estimate_choice(const MethodEstimate& method, const MatrixXd& x_new, int ndraws,
                               std::uint64_t seed);

struct BenchmarkConfig {
  int n_designs = 25;
  double x_sd = 0.5;
  int ndraws = 200000;
  std::uint64_t seed = 1;
  std::string reference_method = "veb";

  void validate() const;
};

struct PredictiveReport {
  int design = 0;
  MatrixXd x_new;
  ChoiceEstimate truth;
  std::map<std::string, ChoiceEstimate> estimates;
  std::map<std::string, double> tv_errors;
};

struct BenchmarkResult {
  std::vector<PredictiveReport> designs;
  int median_design = 0;
  std::string reference_method;

  const PredictiveReport& median() const { return designs.at(median_design); }
};

/// Index of the lower median ((n-1)/2-th order statistic); ties go to the
/// lowest index.
int median_index(const std::vector<double>& values);

/// Draws n_designs attribute matrices with iid N(0, x_sd^2) entries,
/// computes the true and estimated predictive choice distributions and TV
/// errors for each, and marks the design giving the median TV error of the
/// reference method (the first method if the named one is absent).
BenchmarkResult benchmark_scenario(const std::vector<MethodEstimate>& methods,
                                   const PopulationParams& truth, int num_items,
                                   const BenchmarkConfig& config);

}  // namespace vichoice
