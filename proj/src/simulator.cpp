#include "vichoice/simulator.hpp"

#include <string>
#include <vector>

#include "vichoice/errors.hpp"
#include "vichoice/rng.hpp"

namespace vichoice {

std::string_view to_string(Heterogeneity het) {
  return het == Heterogeneity::Low ? "low" : "high";
}

Heterogeneity parse_heterogeneity(std::string_view text) {
  if (text == "low") return Heterogeneity::Low;
  if (text == "high") return Heterogeneity::High;
  throw ValidationError("het", "expected 'low' or 'high', got '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  if (num_items < 2) throw ValidationError("scenario-J", "must be >= 2");
  if (num_attributes < 1) throw ValidationError("scenario-K", "must be >= 1");
  if (num_agents < 1) throw ValidationError("agents", "must be >= 1");
  if (events_per_agent < 1) throw ValidationError("events", "must be >= 1");
  if (!(x_sd > 0.0)) throw ValidationError("x_sd", "must be positive");
  if (params_override) {
    if (params_override->dim() != num_attributes) {
      throw DimensionError("parameter override does not match K");
    }
    params_override->validate(/*allow_singular=*/true);
  }
}

PopulationParams scenario_params(int num_attributes, Heterogeneity het) {
  if (num_attributes < 1) throw ValidationError("scenario-K", "must be >= 1");
  const int k = num_attributes;
  PopulationParams p;
  p.zeta.resize(k);
  if (k == 1) {
    p.zeta(0) = -2.0;
  } else {
    for (int i = 0; i < k; ++i) p.zeta(i) = -2.0 + 4.0 * i / (k - 1);
  }
  const double scale = het == Heterogeneity::Low ? 0.25 : 1.0;
  p.omega = scale * MatrixXd::Identity(k, k);
  return p;
}

std::pair<ChoiceDataset, GroundTruth> simulate_dataset(const ScenarioConfig& config) {
  config.validate();
  const int J = config.num_items;
  const int K = config.num_attributes;
  const int H = config.num_agents;

  PopulationParams params =
      config.params_override ? *config.params_override
                             : scenario_params(K, config.heterogeneity);
  const MatrixXd factor =
      config.params_override ? psd_factor(params.omega) : cholesky_lower(params.omega, "omega");

  std::vector<AgentData> agents(H);
  MatrixXd betas(H, K);

#pragma omp parallel for schedule(static)
  for (int h = 0; h < H; ++h) {
    Rng rng = make_stream(config.seed, streams::kAgentSimulation, static_cast<std::uint64_t>(h));
    const VectorXd beta = params.zeta + factor * standard_normal(rng, K);
    betas.row(h) = beta.transpose();
    auto& events = agents[h].events;
    events.reserve(config.events_per_agent);
    for (int t = 0; t < config.events_per_agent; ++t) {
      ChoiceEvent ev;
      ev.x = config.x_sd * standard_normal(rng, J, K);
      ev.choice = draw_categorical(rng, mnl_choice_prob(ev.x, beta));
      events.push_back(std::move(ev));
    }
  }

  return {ChoiceDataset(J, K, std::move(agents)), GroundTruth{std::move(params), std::move(betas)}};
}

}  // namespace vichoice
