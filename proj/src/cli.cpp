#include "vichoice/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "vichoice/errors.hpp"
#include "vichoice/evaluation.hpp"
#include "vichoice/inference_eb.hpp"
#include "vichoice/inference_hb.hpp"
#include "vichoice/io.hpp"

namespace vichoice::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Fit: return "fit";
    case Command::Eval: return "eval";
    case Command::Bench: return "bench";
  }
  return "?";
}

void check_method(const std::string& m) {
  if (m != "veb" && m != "vb") throw ValidationError("method", "expected 'veb' or 'vb', got '" + m + "'");
}

template <class T>
std::vector<T> as_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

// Settings that determine the command's results. Paths, thread count and
// timings live in the "runtime" section of each artifact instead.
json config_json(const RunConfig& c) {
  json hets = json::array();
  for (auto h : c.heterogeneity) hets.push_back(std::string(to_string(h)));
  json j = {{"command", std::string(command_name(c.command))}};
  const bool bench = c.command == Command::Bench;
  if (c.command != Command::Eval) {
    j["scenario-J"] = c.num_items;
    j["agents"] = c.agents;
    j["scenario-K"] = c.attributes;
    j["het"] = hets;
    j["events"] = c.events;
    j["seed"] = c.seed;
  }
  if (c.command != Command::Fit) j["x-sd"] = c.x_sd;
  if (c.command == Command::Fit || bench) {
    j["method"] = c.methods;
    j["approx"] = std::string(to_string(c.approx));
    j["rel-tol"] = c.rel_tol;
    j["max-iters"] = c.max_iters;
  }
  if (c.command == Command::Eval || bench) {
    j["ndraws"] = c.ndraws;
    j["n-designs"] = c.n_designs;
    j["eval-seed"] = c.eval_seed;
  }
  return j;
}

ScenarioConfig scenario_of(const RunConfig& c) {
  ScenarioConfig s;
  s.num_items = c.num_items;
  s.num_agents = c.agents.front();
  s.num_attributes = c.attributes.front();
  s.heterogeneity = c.heterogeneity.front();
  s.events_per_agent = c.events;
  s.x_sd = c.x_sd;
  s.seed = c.seed;
  return s;
}

json scenario_json(const ScenarioConfig& s) {
  return {{"J", s.num_items},
          {"K", s.num_attributes},
          {"H", s.num_agents},
          {"het", std::string(to_string(s.heterogeneity))},
          {"T", s.events_per_agent},
          {"x_sd", s.x_sd},
          {"seed", s.seed}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("out", "cannot create directory " + dir.string());
}

struct SimulateOutput {
  fs::path data;
  fs::path truth;
};

SimulateOutput do_simulate(const RunConfig& cfg, const fs::path& out) {
  ensure_dir(out);
  const ScenarioConfig scenario = scenario_of(cfg);
  auto [data, truth] = simulate_dataset(scenario);
  SimulateOutput paths{out / "dataset.jsonl", out / "truth.json"};
  io::write_dataset_file(paths.data, data, {{"scenario", scenario_json(scenario)}, {"config", config_json(cfg)}});
  io::write_matrix_csv(out / "betas.csv", truth.betas);
  json t = io::to_json(truth.params);
  t["betas_path"] = "betas.csv";
  t["J"] = scenario.num_items;
  t["K"] = scenario.num_attributes;
  t["scenario"] = scenario_json(scenario);
  t["config"] = config_json(cfg);
  io::write_json_file(paths.truth, t);
  return paths;
}

struct FitOutput {
  fs::path report;
  bool converged = false;
  double seconds = 0.0;
};

FitOutput do_fit(const RunConfig& cfg, const fs::path& data_path, const std::string& method,
                 const fs::path& out) {
  check_method(method);
  ensure_dir(out);
  const io::LoadedDataset loaded = io::read_dataset_file(data_path);
  const ChoiceDataset& data = loaded.data;

  json report = {{"artifact", "fit_report"},
                 {"method", method},
                 {"approx", std::string(to_string(cfg.approx))},
                 {"config", config_json(cfg)},
                 {"data", {{"path", data_path.string()}, {"header", loaded.header}}}};
  json state = {{"artifact", "variational_state"},
                {"method", method},
                {"approx", std::string(to_string(cfg.approx))}};
  json agents = json::array();

  const auto start = std::chrono::steady_clock::now();
  bool converged = false;
  if (method == "veb") {
    EmSettings settings;
    settings.rel_tol = cfg.rel_tol;
    settings.max_em_iters = cfg.max_iters;
    const EBFit fit = fit_veb(data, cfg.approx, settings);
    converged = fit.converged;
    report["iterations"] = fit.em_iterations;
    report["elbo_trace"] = fit.elbo_trace;
    report["init"] = {{"beta", io::to_json(fit.init.beta)}, {"ridge_used", fit.init.ridge_used}};
    report["params"] = io::to_json(fit.params);
    state["params"] = report["params"];
    for (const auto& q : fit.agents_var) agents.push_back(io::to_json(q));
  } else {
    HbSettings settings;
    settings.rel_tol = cfg.rel_tol;
    settings.max_iters = cfg.max_iters;
    const Hyperpriors hyper = Hyperpriors::diffuse(data.num_attributes());
    const HBFit fit = fit_vb(data, hyper, cfg.approx, settings);
    converged = fit.converged;
    report["iterations"] = fit.iterations;
    report["elbo_trace"] = fit.elbo_trace;
    report["init"] = {{"beta", io::to_json(fit.init.beta)}, {"ridge_used", fit.init.ridge_used}};
    report["hyperpriors"] = io::to_json(hyper);
    report["global"] = io::to_json(fit.global_var);
    state["global"] = report["global"];
    for (const auto& q : fit.agents_var) agents.push_back(io::to_json(q));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report["converged"] = converged;
  const std::string state_name = "state_" + method + ".json";
  report["state_file"] = state_name;
  report["runtime"] = {{"fit_seconds", seconds},
                       {"threads", omp_get_max_threads()},
                       {"out", out.string()}};
  state["agents"] = std::move(agents);

  FitOutput res{out / ("fit_" + method + ".json"), converged, seconds};
  io::write_json_file(res.report, report);
  io::write_json_file(out / state_name, state);
  return res;
}

MethodEstimate method_from_report(const json& report) {
  const std::string method = report.at("method").get<std::string>();
  if (report.contains("params")) return {method, io::params_from_json(report.at("params"))};
  if (report.contains("global")) return {method, io::global_from_json(report.at("global"))};
  throw ValidationError("fit", "report for '" + method + "' has neither params nor global");
}

std::map<std::string, double> do_eval(const RunConfig& cfg, const std::vector<fs::path>& fit_paths,
                                      const fs::path& truth_path, const fs::path& out) {
  if (fit_paths.empty()) throw ValidationError("fit", "eval needs at least one --fit report");
  if (truth_path.empty()) throw ValidationError("truth", "eval needs --truth");
  ensure_dir(out);
  const json truth_json = io::read_json_file(truth_path);
  const PopulationParams truth = io::params_from_json(truth_json);
  const int J = truth_json.at("J").get<int>();

  std::vector<MethodEstimate> methods;
  json fit_list = json::array();
  for (const auto& p : fit_paths) {
    methods.push_back(method_from_report(io::read_json_file(p)));
    fit_list.push_back(p.string());
  }

  BenchmarkConfig bc;
  bc.n_designs = cfg.n_designs;
  bc.ndraws = cfg.ndraws;
  bc.x_sd = cfg.x_sd;
  bc.seed = cfg.eval_seed;
  const BenchmarkResult result = benchmark_scenario(methods, truth, J, bc);

  auto estimate_json = [](const ChoiceEstimate& e) {
    return json{{"probs", io::to_json(e.probs)}, {"std_error", io::to_json(e.std_error)}};
  };
  json designs = json::array();
  for (const auto& rep : result.designs) {
    json est = json::object();
    for (const auto& [name, e] : rep.estimates) est[name] = estimate_json(e);
    designs.push_back({{"design", rep.design},
                       {"x_new", io::to_json(rep.x_new)},
                       {"truth", estimate_json(rep.truth)},
                       {"estimates", est},
                       {"tv_errors", rep.tv_errors}});
  }
  const PredictiveReport& med = result.median();
  json report = {{"artifact", "predictive_report"},
                 {"config", config_json(cfg)},
                 {"inputs", {{"fits", fit_list}, {"truth", truth_path.string()}}},
                 {"reference_method", result.reference_method},
                 {"median_design", result.median_design},
                 {"median_tv", med.tv_errors},
                 {"designs", designs}};
  if (J == 3) {
    json simplex = {{"truth", io::to_json(med.truth.probs)}};
    for (const auto& [name, e] : med.estimates) simplex[name] = io::to_json(e.probs);
    report["median_simplex"] = simplex;
  }
  io::write_json_file(out / "eval.json", report);

  std::ofstream csv(out / "eval_tv.csv");
  if (!csv) throw ValidationError("out", "cannot write eval_tv.csv");
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "design";
  for (const auto& m : methods) csv << ',' << m.name;
  csv << '\n';
  for (const auto& rep : result.designs) {
    csv << rep.design;
    for (const auto& m : methods) csv << ',' << rep.tv_errors.at(m.name);
    csv << '\n';
  }
  return med.tv_errors;
}

std::string cell_name(int H, int K, Heterogeneity het) {
  return "cell_H" + std::to_string(H) + "_K" + std::to_string(K) + "_" + std::string(to_string(het));
}

int do_bench(const RunConfig& cfg) {
  ensure_dir(cfg.out_dir);
  bool all_converged = true;
  std::map<std::tuple<int, int, int>, std::map<std::string, double>> table;  // (H, het, K)
  json cells = json::array();
  std::uint64_t index = 0;
  for (int H : cfg.agents) {
    for (Heterogeneity het : cfg.heterogeneity) {
      for (int K : cfg.attributes) {
        RunConfig cell = cfg;
        cell.agents = {H};
        cell.attributes = {K};
        cell.heterogeneity = {het};
        cell.seed = cfg.seed + index;
        cell.eval_seed = cfg.eval_seed + index;
        const fs::path dir = cfg.out_dir / cell_name(H, K, het);

        cell.command = Command::Simulate;
        const SimulateOutput sim = do_simulate(cell, dir);
        std::vector<fs::path> fits;
        json fit_info = json::object();
        for (const auto& m : cfg.methods) {
          cell.command = Command::Fit;
          cell.methods = {m};
          const FitOutput f = do_fit(cell, sim.data, m, dir);
          all_converged = all_converged && f.converged;
          fits.push_back(f.report);
          fit_info[m] = {{"converged", f.converged}, {"fit_seconds", f.seconds}};
        }
        cell.command = Command::Eval;
        cell.methods = cfg.methods;
        const auto tv = do_eval(cell, fits, sim.truth, dir);
        table[{H, static_cast<int>(het), K}] = tv;
        cells.push_back({{"dir", dir.string()},
                         {"agents", H},
                         {"K", K},
                         {"het", std::string(to_string(het))},
                         {"seed", cell.seed},
                         {"eval_seed", cell.eval_seed},
                         {"fits", fit_info},
                         {"median_tv", tv}});
        std::cerr << cell_name(H, K, het) << ":";
        for (const auto& [m, v] : tv) std::cerr << ' ' << m << '=' << v;
        std::cerr << '\n';
        ++index;
      }
    }
  }

  std::ofstream csv(cfg.out_dir / "bench.csv");
  if (!csv) throw ValidationError("out", "cannot write bench.csv");
  csv << std::fixed << std::setprecision(4) << "agents,het";
  for (int K : cfg.attributes)
    for (const auto& m : cfg.methods) csv << ',' << m << "_K" << K;
  csv << '\n';
  for (int H : cfg.agents) {
    for (Heterogeneity het : cfg.heterogeneity) {
      csv << H << ',' << to_string(het);
      for (int K : cfg.attributes)
        for (const auto& m : cfg.methods) csv << ',' << table.at({H, static_cast<int>(het), K}).at(m);
      csv << '\n';
    }
  }
  io::write_json_file(cfg.out_dir / "bench.json",
                      {{"artifact", "bench"}, {"config", config_json(cfg)}, {"cells", cells}});
  return all_converged ? kExitOk : kExitNotConverged;
}

}  // namespace

void RunConfig::validate() const {
  if (num_items < 2) throw ValidationError("scenario-J", "must be >= 2");
  if (agents.empty()) throw ValidationError("agents", "needs at least one value");
  if (attributes.empty()) throw ValidationError("scenario-K", "needs at least one value");
  if (heterogeneity.empty()) throw ValidationError("het", "needs at least one value");
  for (int h : agents)
    if (h < 1) throw ValidationError("agents", "must be >= 1");
  for (int k : attributes)
    if (k < 1) throw ValidationError("scenario-K", "must be >= 1");
  if (events < 1) throw ValidationError("events", "must be >= 1");
  if (!(x_sd > 0.0)) throw ValidationError("x-sd", "must be positive");
  if (methods.empty()) throw ValidationError("method", "needs at least one value");
  for (const auto& m : methods) check_method(m);
  if (!(rel_tol > 0.0)) throw ValidationError("rel-tol", "must be positive");
  if (max_iters < 1) throw ValidationError("max-iters", "must be >= 1");
  if (ndraws < 1) throw ValidationError("ndraws", "must be >= 1");
  if (n_designs < 1) throw ValidationError("n-designs", "must be >= 1");
  if (threads < 0) throw ValidationError("threads", "must be >= 0");

  const bool single = command == Command::Simulate || command == Command::Fit;
  if (single && (agents.size() != 1 || attributes.size() != 1 || heterogeneity.size() != 1)) {
    throw ValidationError("agents", "simulate/fit take a single scenario, not a grid");
  }
  if (command == Command::Fit) {
    if (methods.size() != 1) throw ValidationError("method", "fit takes exactly one method");
    if (data_path.empty()) throw ValidationError("data", "fit needs --data");
    if (!fs::exists(data_path)) throw ValidationError("data", "no such file " + data_path.string());
  }
  if (command == Command::Eval) {
    if (fit_paths.empty()) throw ValidationError("fit", "eval needs at least one --fit");
    for (const auto& p : fit_paths)
      if (!fs::exists(p)) throw ValidationError("fit", "no such file " + p.string());
    if (truth_path.empty()) throw ValidationError("truth", "eval needs --truth");
    if (!fs::exists(truth_path)) throw ValidationError("truth", "no such file " + truth_path.string());
  }
}

RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Variational inference for the mixed multinomial logit model"};
  app.require_subcommand(1);
  app.fallthrough();
  auto* sim = app.add_subcommand("simulate", "Simulate a scenario dataset and its ground truth");
  auto* fit = app.add_subcommand("fit", "Fit VEB or VB to a dataset");
  auto* eval = app.add_subcommand("eval", "Evaluate fitted models against ground truth");
  auto* bench = app.add_subcommand("bench", "Simulate, fit and evaluate a scenario grid");

  std::vector<std::string> het_text{"low"};
  std::string approx_text = "d1";
  std::string data_path, truth_path, out_dir = ".", config_path;
  std::vector<std::string> fit_paths;

  app.add_option("--scenario-J", cfg.num_items, "Number of choice items J");
  app.add_option("--scenario-K", cfg.attributes, "Number of attributes K (comma list for bench)")->delimiter(',');
  app.add_option("--agents", cfg.agents, "Number of agents H (comma list for bench)")->delimiter(',');
  app.add_option("--het", het_text, "Heterogeneity: low or high (comma list for bench)")->delimiter(',');
  app.add_option("--events", cfg.events, "Choice events per agent");
  app.add_option("--x-sd", cfg.x_sd, "Standard deviation of attribute entries");
  app.add_option("--seed", cfg.seed, "Simulation seed");
  app.add_option("--method", cfg.methods, "veb or vb (comma list for bench)")->delimiter(',');
  app.add_option("--approx", approx_text, "Expected log-sum-exp approximation: d0 or d1");
  app.add_option("--rel-tol", cfg.rel_tol, "Relative convergence tolerance");
  app.add_option("--max-iters", cfg.max_iters, "Maximum outer iterations");
  app.add_option("--ndraws", cfg.ndraws, "Monte-Carlo draws per predictive distribution");
  app.add_option("--n-designs", cfg.n_designs, "Number of random x_new designs");
  app.add_option("--eval-seed", cfg.eval_seed, "Evaluation seed (default: seed + 1)");
  app.add_option("--data", data_path, "Dataset file (JSON lines)");
  app.add_option("--truth", truth_path, "Ground-truth JSON");
  app.add_option("--fit", fit_paths, "Fit report JSON (repeatable)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    if (e.get_exit_code() == 0) {  // --help
      std::cout << msg.str();
      throw;
    }
    throw ValidationError("arguments", msg.str());
  }

  if (sim->parsed()) cfg.command = Command::Simulate;
  if (fit->parsed()) cfg.command = Command::Fit;
  if (eval->parsed()) cfg.command = Command::Eval;
  if (bench->parsed()) cfg.command = Command::Bench;
  if (cfg.command == Command::Bench && app.count("--method") == 0) cfg.methods = {"veb", "vb"};

  bool eval_seed_given = app.count("--eval-seed") > 0;
  if (!config_path.empty()) {
    cfg.config_path = config_path;
    const json file = io::read_json_file(config_path);
    if (!file.is_object()) throw ValidationError("config", "config file must hold a JSON object");
    static const std::set<std::string> known = {
        "scenario-J", "scenario-K", "agents", "het",  "events", "x-sd",  "seed",
        "method",     "approx",     "rel-tol", "max-iters", "ndraws", "n-designs", "eval-seed",
        "data",       "truth",      "fit",    "out",  "threads"};
    for (const auto& [key, value] : file.items()) {
      if (!known.count(key)) throw ValidationError(key, "unknown config key");
      if (app.count("--" + key) > 0) continue;
      try {
        if (key == "scenario-J") cfg.num_items = value.get<int>();
        else if (key == "scenario-K") cfg.attributes = as_list<int>(value);
        else if (key == "agents") cfg.agents = as_list<int>(value);
        else if (key == "het") het_text = as_list<std::string>(value);
        else if (key == "events") cfg.events = value.get<int>();
        else if (key == "x-sd") cfg.x_sd = value.get<double>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "method") cfg.methods = as_list<std::string>(value);
        else if (key == "approx") approx_text = value.get<std::string>();
        else if (key == "rel-tol") cfg.rel_tol = value.get<double>();
        else if (key == "max-iters") cfg.max_iters = value.get<int>();
        else if (key == "ndraws") cfg.ndraws = value.get<int>();
        else if (key == "n-designs") cfg.n_designs = value.get<int>();
        else if (key == "eval-seed") {
          cfg.eval_seed = value.get<std::uint64_t>();
          eval_seed_given = true;
        }
        else if (key == "data") data_path = value.get<std::string>();
        else if (key == "truth") truth_path = value.get<std::string>();
        else if (key == "fit") fit_paths = as_list<std::string>(value);
        else if (key == "out") out_dir = value.get<std::string>();
        else if (key == "threads") cfg.threads = value.get<int>();
      } catch (const json::exception& e) {
        throw ValidationError(key, std::string("bad value in config file: ") + e.what());
      }
    }
  }
  if (!eval_seed_given) cfg.eval_seed = cfg.seed + 1;

  cfg.heterogeneity.clear();
  for (const auto& h : het_text) cfg.heterogeneity.push_back(parse_heterogeneity(h));
  cfg.approx = parse_lse_approx(approx_text);
  cfg.data_path = data_path;
  cfg.truth_path = truth_path;
  cfg.fit_paths.assign(fit_paths.begin(), fit_paths.end());
  cfg.out_dir = out_dir;
  cfg.validate();
  return cfg;
}

int run(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  switch (cfg.command) {
    case Command::Simulate: {
      const auto out = do_simulate(cfg, cfg.out_dir);
      std::cerr << "wrote " << out.data.string() << " and " << out.truth.string() << '\n';
      return kExitOk;
    }
    case Command::Fit: {
      const auto res = do_fit(cfg, cfg.data_path, cfg.methods.front(), cfg.out_dir);
      std::cerr << "wrote " << res.report.string() << (res.converged ? "" : " (not converged)") << '\n';
      return res.converged ? kExitOk : kExitNotConverged;
    }
    case Command::Eval: {
      const auto tv = do_eval(cfg, cfg.fit_paths, cfg.truth_path, cfg.out_dir);
      for (const auto& [m, v] : tv) std::cerr << m << " median TV error: " << v << " pp\n";
      return kExitOk;
    }
    case Command::Bench:
      return do_bench(cfg);
  }
  return kExitInvalid;
}

int run_cli(int argc, const char* const* argv) {
  try {
    return run(parse_args(argc, argv));
  } catch (const CLI::ParseError&) {
    return kExitOk;  // --help already printed
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace vichoice::cli
