#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "vichoice/model.hpp"

namespace vichoice {

enum class Heterogeneity { Low, High };

std::string_view to_string(Heterogeneity het);
Heterogeneity parse_heterogeneity(std::string_view text);

struct ScenarioConfig {
  int num_items = 3;        // J
  int num_attributes = 3;   // K
  int num_agents = 250;     // H
  Heterogeneity heterogeneity = Heterogeneity::Low;
  int events_per_agent = 25;  // T
  double x_sd = 0.5;
  std::uint64_t seed = 1;

  // Replaces the scenario's (zeta, omega). A singular omega (including the
  // zero matrix) is accepted only through this override.
  std::optional<PopulationParams> params_override;

  void validate() const;
};

/// Drawn preference vectors alongside the population they came from.
struct GroundTruth {
  PopulationParams params;
  MatrixXd betas;  // H x K
};

/// zeta evenly spaced on [-2, 2] (K = 1 gives the left endpoint);
/// omega = 0.25 I for low heterogeneity, I for high.
PopulationParams scenario_params(int num_attributes, Heterogeneity het);

/// Simulates H agents. Agent h draws from its own stream
/// make_stream(seed, kAgentSimulation, h): first beta_h, then for each event
/// the J x K attribute matrix (row-major) followed by the choice. Output is
/// therefore identical for any thread count.
std::pair<ChoiceDataset, GroundTruth> simulate_dataset(const ScenarioConfig& config);

}  // namespace vichoice
