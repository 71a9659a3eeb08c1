#include "vichoice/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vichoice/errors.hpp"
#include "vichoice/rng.hpp"

namespace vichoice {

namespace {

struct ChunkSums {
  VectorXd sum;
  VectorXd sum_sq;
};

// Runs `draw_beta(rng)` ndraws times across fixed-size chunks and averages
// the MNL probabilities at x_new.
template <class DrawBeta>
ChoiceEstimate chunked_average(const MatrixXd& x_new, int ndraws, std::uint64_t seed,
                               const DrawBeta& draw_beta) {
  if (ndraws < 1) throw ValidationError("ndraws", "must be >= 1");
  const auto J = x_new.rows();
  const int chunks = (ndraws + kDrawsPerChunk - 1) / kDrawsPerChunk;
  std::vector<ChunkSums> partial(chunks);

#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < chunks; ++c) {
    Rng rng = make_stream(seed, streams::kPredictiveChunk, static_cast<std::uint64_t>(c));
    const int n = std::min(kDrawsPerChunk, ndraws - c * kDrawsPerChunk);
    VectorXd sum = VectorXd::Zero(J);
    VectorXd sum_sq = VectorXd::Zero(J);
    for (int i = 0; i < n; ++i) {
      const VectorXd p = softmax(x_new * draw_beta(rng));
      sum += p;
      sum_sq += p.cwiseAbs2();
    }
    partial[c] = {std::move(sum), std::move(sum_sq)};
  }

  VectorXd sum = VectorXd::Zero(J);
  VectorXd sum_sq = VectorXd::Zero(J);
  for (const auto& part : partial) {
    sum += part.sum;
    sum_sq += part.sum_sq;
  }
  const double n = ndraws;
  ChoiceEstimate est;
  est.ndraws = ndraws;
  est.probs = sum / n;
  if (ndraws > 1) {
    const VectorXd var = ((sum_sq / n - est.probs.cwiseAbs2()) * (n / (n - 1.0))).cwiseMax(0.0);
    est.std_error = (var / n).cwiseSqrt();
  } else {
    est.std_error = VectorXd::Zero(J);
  }
  return est;
}

void check_design(const MatrixXd& x_new, Eigen::Index k) {
  if (x_new.cols() != k) throw DimensionError("x_new must have K columns");
  if (x_new.rows() < 1) throw DimensionError("x_new has no rows");
  if (!x_new.allFinite()) throw NonFiniteError("x_new has non-finite entries");
}

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ChoiceEstimate predictive_choice(const PopulationParams& params, const MatrixXd& x_new, int ndraws,
                                 std::uint64_t seed) {
  params.validate(/*allow_singular=*/true);
  check_design(x_new, params.dim());
  const MatrixXd factor = psd_factor(params.omega);
  const VectorXd& zeta = params.zeta;
  return chunked_average(x_new, ndraws, seed, [&](Rng& rng) -> VectorXd {
    return zeta + factor * standard_normal(rng, zeta.size());
  });
}

ChoiceEstimate posterior_predictive_choice(const VariationalGlobal& global, const MatrixXd& x_new,
                                           int ndraws, std::uint64_t seed) {
  const int k = global.dim();
  check_design(x_new, k);
  if (global.sigma_zeta.rows() != k || global.upsilon.rows() != k) {
    throw DimensionError("global variational matrices must be KxK");
  }
  if (!(global.omega_dof > k - 1.0)) {
    throw DomainError("cannot sample Wishart with omega_dof <= K - 1");
  }
  const MatrixXd zeta_factor = psd_factor(global.sigma_zeta);
  const MatrixXd ups_factor = cholesky_lower(global.upsilon, "upsilon");
  const double dof = global.omega_dof;

  return chunked_average(x_new, ndraws, seed, [&](Rng& rng) -> VectorXd {
    const VectorXd zeta = global.mu_zeta + zeta_factor * standard_normal(rng, k);
    // Bartlett: Omega^-1 = B B' with B = chol(upsilon) A, A lower triangular,
    // A_ii^2 ~ chi2(dof - i) (0-based i), A_ij ~ N(0,1) below the diagonal.
    MatrixXd a = MatrixXd::Zero(k, k);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < k; ++i) {
      std::chi_squared_distribution<double> chi2(dof - i);
      a(i, i) = std::sqrt(chi2(rng));
      for (int j = 0; j < i; ++j) a(i, j) = normal(rng);
    }
    const MatrixXd b = ups_factor * a;
    // beta - zeta = B^-T z has covariance (B B')^-1 = Omega.
    const VectorXd z = standard_normal(rng, k);
    return zeta + b.transpose().triangularView<Eigen::Upper>().solve(z);
  });
}

double tv_error(const VectorXd& p, const VectorXd& q) {
  if (p.size() != q.size()) throw DimensionError("distributions have different lengths");
  for (const VectorXd* v : {&p, &q}) {
    if (!v->allFinite() || v->minCoeff() < -1e-8 || std::abs(v->sum() - 1.0) > 1e-8) {
      throw ValidationError("simplex", "input is not a probability vector");
    }
  }
  return 100.0 * 0.5 * (p - q).cwiseAbs().sum();
}

ChoiceEstimate estimate_choice(const MethodEstimate& method, const MatrixXd& x_new, int ndraws,
                               std::uint64_t seed) {
  if (const auto* params = std::get_if<PopulationParams>(&method.fit)) {
    return predictive_choice(*params, x_new, ndraws, seed);
  }
  return posterior_predictive_choice(std::get<VariationalGlobal>(method.fit), x_new, ndraws, seed);
}

void BenchmarkConfig::validate() const {
  if (n_designs < 1) throw ValidationError("n-designs", "must be >= 1");
  if (!(x_sd > 0.0)) throw ValidationError("x_sd", "must be positive");
  if (ndraws < 1) throw ValidationError("ndraws", "must be >= 1");
}

int median_index(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("values", "median of an empty list");
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  const double median = values[order[(values.size() - 1) / 2]];
  return static_cast<int>(std::find(values.begin(), values.end(), median) - values.begin());
}

BenchmarkResult benchmark_scenario(const std::vector<MethodEstimate>& methods,
                                   const PopulationParams& truth, int num_items,
                                   const BenchmarkConfig& config) {
  config.validate();
  if (methods.empty()) throw ValidationError("fit", "no fitted methods to evaluate");
  const int k = truth.dim();
  for (const auto& m : methods) {
    const int mk = std::visit([](const auto& f) { return f.dim(); }, m.fit);
    if (mk != k) throw DimensionError("method '" + m.name + "' has a different K than the truth");
  }

  BenchmarkResult result;
  result.reference_method = methods.front().name;
  for (const auto& m : methods) {
    if (m.name == config.reference_method) result.reference_method = m.name;
  }

  std::vector<double> reference_errors;
  for (int d = 0; d < config.n_designs; ++d) {
    PredictiveReport rep;
    rep.design = d;
    Rng rng = make_stream(config.seed, streams::kDesign, static_cast<std::uint64_t>(d));
    rep.x_new = config.x_sd * standard_normal(rng, num_items, k);
    rep.truth = predictive_choice(truth, rep.x_new, config.ndraws,
                                  stream_seed(config.seed, streams::kEvalTruth, d));
    for (const auto& m : methods) {
      const std::uint64_t s =
          stream_seed(config.seed, streams::kEvalMethod ^ name_hash(m.name), d);
      ChoiceEstimate est = estimate_choice(m, rep.x_new, config.ndraws, s);
      rep.tv_errors[m.name] = tv_error(est.probs, rep.truth.probs);
      rep.estimates[m.name] = std::move(est);
    }
    reference_errors.push_back(rep.tv_errors.at(result.reference_method));
    result.designs.push_back(std::move(rep));
  }
  result.median_design = median_index(reference_errors);
  return result;
}

}  // namespace vichoice
