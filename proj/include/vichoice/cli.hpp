#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vichoice/approx.hpp"
#include "vichoice/simulator.hpp"

namespace vichoice::cli {

enum class Command { Simulate, Fit, Eval, Bench };

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNotConverged = 2;

/// Fully resolved settings for one invocation. Values come from flags, then
/// from the --config JSON file for anything not given on the command line,
/// then from the defaults below.
struct RunConfig {
  Command command = Command::Simulate;

  // Scenario. simulate/fit use the first entry of each grid list; bench
  // iterates over all of them.
  int num_items = 3;
  std::vector<int> agents{250};
  std::vector<int> attributes{3};
  std::vector<Heterogeneity> heterogeneity{Heterogeneity::Low};
  int events = 25;
  double x_sd = 0.5;
  std::uint64_t seed = 1;

  std::vector<std::string> methods{"veb"};
  LseApprox approx = LseApprox::D1;
  double rel_tol = 1e-4;
  int max_iters = 500;

  int ndraws = 200000;
  int n_designs = 25;
  std::uint64_t eval_seed = 2;

  std::filesystem::path data_path;
  std::filesystem::path truth_path;
  std::vector<std::filesystem::path> fit_paths;
  std::filesystem::path out_dir = ".";
  int threads = 0;  // 0: OpenMP default (all cores)
  std::filesystem::path config_path;

  void validate() const;
};

/// Parses argv. Throws ValidationError for bad values; CLI11 parse errors
/// are reported through the exit code of run_cli.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes a resolved configuration and returns the process exit code.
int run(const RunConfig& config);

/// parse_args + run with error reporting on stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace vichoice::cli
