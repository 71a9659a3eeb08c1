// Acceptance suite: one PASS/FAIL line per criterion.
//
//   vichoice_acceptance [--work-dir DIR] [--only N[,N...]]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_runner.hpp"
#include "test_support.hpp"
#include "vichoice/elbo.hpp"
#include "vichoice/evaluation.hpp"
#include "vichoice/inference_eb.hpp"
#include "vichoice/inference_hb.hpp"
#include "vichoice/simulator.hpp"

using namespace vichoice;
using namespace vichoice::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Fourth-order central differences.
VectorXd fd4_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h = 1e-3) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto at = [&](double d) {
      VectorXd y = x;
      y(i) += d;
      return f(y);
    };
    g(i) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  return g;
}

MatrixXd fd4_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x, double h = 1e-3) {
  MatrixXd jac(f(x).size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto at = [&](double d) {
      VectorXd y = x;
      y(i) += d;
      return f(y);
    };
    jac.col(i) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  return jac;
}

double norm_rel(const MatrixXd& analytic, const MatrixXd& reference) {
  const double denom = reference.norm();
  return denom > 0 ? (analytic - reference).norm() / denom : analytic.norm();
}

// 1. Gradient correctness.
Outcome gradients() {
  const auto t0 = Clock::now();
  Rng rng = test_rng(1001);
  double worst_mu = 0, worst_l = 0, worst_d1mu = 0, worst_d1s = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int K = uniform_int(rng, 1, 10), J = uniform_int(rng, 2, 12);
    const AgentData agent = random_agent(rng, uniform_int(rng, 1, 10), J, K, 0.5);
    const AgentPrior prior = eb_agent_prior({random_vector(rng, K), random_spd(rng, K)});
    const auto q = VariationalAgent::full(random_vector(rng, K), random_lower(rng, K, 0.3));
    const AgentSubproblem sub(agent, prior, LseApprox::D0);
    const VectorXd theta = q.packed();
    VectorXd grad;
    sub(theta, &grad);
    const VectorXd fd = fd4_gradient([&](const VectorXd& t) { return sub(t, nullptr); }, theta);
    worst_mu = std::max(worst_mu, norm_rel(grad.head(K), fd.head(K)));
    worst_l = std::max(worst_l, norm_rel(grad.tail(grad.size() - K), fd.tail(fd.size() - K)));

    const MatrixXd x = random_matrix(rng, J, K, 0.5);
    const VectorXd mu = random_vector(rng, K), lv = random_vector(rng, K, 0.5);
    worst_d1mu = std::max(worst_d1mu, norm_rel(grad_expected_lse_d1_mu(mu, lv, x),
                                               fd4_gradient([&](const VectorXd& v) { return expected_lse_d1(v, lv, x); }, mu)));
    worst_d1s = std::max(worst_d1s, norm_rel(grad_expected_lse_d1_sigma(mu, lv, x),
                                             fd4_gradient([&](const VectorXd& v) { return expected_lse_d1(mu, v, x); }, lv)));
  }
  const double worst = std::max({worst_mu, worst_l, worst_d1mu, worst_d1s});
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 60,
          fmt("max rel err mu %.2e, L %.2e, D1 mu %.2e, D1 sigma %.2e (limit 1e-5); %.1f s (limit 60)", worst_mu,
              worst_l, worst_d1mu, worst_d1s, secs)};
}

// 2. Hessian correctness.
Outcome hessian() {
  Rng rng = test_rng(1002);
  double worst = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int K = uniform_int(rng, 1, 10), J = uniform_int(rng, 2, 12);
    const AgentData agent = random_agent(rng, uniform_int(rng, 1, 10), J, K, 0.5);
    const AgentPrior prior = eb_agent_prior({random_vector(rng, K), random_spd(rng, K)});
    const auto q = VariationalAgent::full(random_vector(rng, K), random_lower(rng, K, 0.3));
    const AgentSubproblem sub(agent, prior, LseApprox::D0);
    const auto mu_grad = [&](const VectorXd& mu) {
      VariationalAgent p = q;
      p.mu = mu;
      VectorXd g;
      sub(p.packed(), &g);
      return VectorXd(g.head(K));
    };
    worst = std::max(worst, norm_rel(agent_mu_hessian(agent, prior, q), fd4_jacobian(mu_grad, q.mu)));
  }
  return {worst < 1e-5, fmt("50 instances, max rel err %.2e (limit 1e-5)", worst)};
}

// 3. Lower bound on the marginal likelihood.
Outcome bound() {
  Rng rng = test_rng(1003);
  int violations = 0;
  double closest = -INFINITY;
  for (int rep = 0; rep < 50; ++rep) {
    AgentData agent = random_agent(rng, 1, 2, 1);
    const ChoiceDataset data(2, 1, {agent});
    const PopulationParams params{random_vector(rng, 1), MatrixXd::Constant(1, 1, uniform(rng, 0.1, 3.0))};
    // The optimized factor is the tightest the family allows.
    const VariationalAgent q = estep_agent(agent, params, VariationalAgent::isotropic(params.zeta, 0.01, LseApprox::D0));
    const double elbo = elbo_eb({q}, params, data, LseApprox::D0);

    Rng mc = make_stream(77, 3, static_cast<std::uint64_t>(rep));
    const int n = 1000000;
    const double sd = std::sqrt(params.omega(0, 0));
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
      const VectorXd beta = params.zeta + sd * standard_normal(mc, 1);
      const double p = mnl_choice_prob(agent.events[0].x, beta)(agent.events[0].choice);
      s += p;
      ss += p * p;
    }
    const double mean = s / n;
    const double se = std::sqrt((ss / n - mean * mean) / n) / mean;  // delta method on the log
    const double gap = elbo - std::log(mean);
    closest = std::max(closest, gap / se);
    if (gap > 3 * se) ++violations;
  }
  return {violations == 0,
          fmt("50 instances, %d violations beyond 3 MC-SE; largest (ELBO - log p)/SE = %.2f", violations, closest)};
}

struct ScenarioRun {
  ScenarioConfig config;
  GroundTruth truth;
  EBFit veb;
  HBFit vb;
  double veb_seconds = 0, vb_seconds = 0;
};

ScenarioRun run_scenario(int H, Heterogeneity het, std::uint64_t seed) {
  ScenarioRun r;
  r.config.num_agents = H;
  r.config.heterogeneity = het;
  r.config.seed = seed;
  auto [data, truth] = simulate_dataset(r.config);
  r.truth = truth;
  auto t0 = Clock::now();
  r.veb = fit_veb(data, LseApprox::D1);
  r.veb_seconds = seconds_since(t0);
  t0 = Clock::now();
  r.vb = fit_vb(data, Hyperpriors::diffuse(3), LseApprox::D1);
  r.vb_seconds = seconds_since(t0);
  return r;
}

std::vector<ScenarioRun>& scenario_cache() {
  static std::vector<ScenarioRun> runs;
  return runs;
}

// Cells in bench order (agents, then heterogeneity); seeds follow the bench
// convention seed + cell index.
const ScenarioRun& cell(int index) {
  auto& runs = scenario_cache();
  static const int agents[] = {250, 250, 1000, 1000};
  static const Heterogeneity hets[] = {Heterogeneity::Low, Heterogeneity::High, Heterogeneity::Low,
                                       Heterogeneity::High};
  while (static_cast<int>(runs.size()) <= index) {
    const int i = static_cast<int>(runs.size());
    runs.push_back(run_scenario(agents[i], hets[i], 1 + i));
  }
  return runs[index];
}

std::pair<int, double> trace_check(const std::vector<double>& trace) {
  int bad = 0;
  double worst = -INFINITY;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double drop = (trace[i - 1] - trace[i]) / std::abs(trace[i - 1]);
    worst = std::max(worst, drop);
    if (drop > 1e-8) ++bad;
  }
  return {bad, worst};
}

// 4. Monotone objective traces.
Outcome monotonicity() {
  const ScenarioRun& r = cell(0);
  const auto [bad_eb, worst_eb] = trace_check(r.veb.elbo_trace);
  const auto [bad_hb, worst_hb] = trace_check(r.vb.elbo_trace);
  return {bad_eb == 0 && bad_hb == 0 && r.veb.converged && r.vb.converged,
          fmt("VEB %zu half-steps, %d drops (largest relative change %.1e); VB %zu steps, %d drops (largest relative change %.1e); converged %d/%d",
              r.veb.elbo_trace.size() - 1, bad_eb, worst_eb, r.vb.elbo_trace.size() - 1, bad_hb, worst_hb,
              r.veb.converged, r.vb.converged)};
}

// 5. M-step against numeric maximization.
Outcome mstep_oracle() {
  Rng rng = test_rng(1005);
  double worst = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const int K = uniform_int(rng, 1, 3), H = uniform_int(rng, 3, 6);
    std::vector<AgentData> agents;
    std::vector<VariationalAgent> q;
    for (int h = 0; h < H; ++h) {
      agents.push_back(random_agent(rng, 3, 3, K));
      q.push_back(VariationalAgent::full(random_vector(rng, K), random_lower(rng, K, 0.5)));
    }
    const ChoiceDataset data(3, K, agents);
    // theta = [zeta; vech(C)] with Omega = C C', diag(C) = exp(.)
    const auto unpack = [K](const VectorXd& t) {
      MatrixXd c = unvech(t.tail(vech_size(K)), K);
      for (int i = 0; i < K; ++i) c(i, i) = std::exp(c(i, i));
      return PopulationParams{t.head(K), c * c.transpose()};
    };
    const auto f = [&](const VectorXd& t) { return elbo_eb(q, unpack(t), data, LseApprox::D0); };
    SmoothObjective obj;
    obj.value = [&](const VectorXd& t, VectorXd* g) {
      if (g) *g = fd4_gradient(f, t, 1e-4);
      return f(t);
    };
    OptimizeSettings s;
    s.grad_tol = 1e-9;
    s.max_iters = 2000;
    const OptimizeResult res = maximize(obj, VectorXd::Zero(K + vech_size(K)), s);
    const PopulationParams numeric = unpack(res.argmax);
    const PopulationParams closed = mstep(q);
    worst = std::max({worst, (numeric.zeta - closed.zeta).cwiseAbs().maxCoeff(),
                      (numeric.omega - closed.omega).cwiseAbs().maxCoeff()});
  }
  return {worst < 1e-4, fmt("10 instances, max abs diff %.2e (limit 1e-4)", worst)};
}

// 6. Hierarchical closed-form updates.
Outcome hb_closed_forms() {
  std::vector<std::string> failures;
  const auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const auto scalar = [](double v) { return MatrixXd::Constant(1, 1, v); };

  const Hyperpriors h1{VectorXd::Zero(1), scalar(1.0), scalar(1.0), 2.0};
  const VariationalGlobal g1{VectorXd::Zero(1), scalar(1.0), scalar(0.5), 2.0};
  expect(std::abs(update_mu_zeta(h1, g1, {VectorXd::Constant(1, 2.0)})(0) - 1.0) <= 1e-10, "mu_zeta scalar");

  const Hyperpriors h2{VectorXd::Zero(2), MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), 4.0};
  const VariationalGlobal g2{VectorXd::Zero(2), MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2) / 4.0, 4.0};
  expect((update_sigma_zeta(h2, g2, 1) - 0.5 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10,
         "sigma_zeta identity");

  Rng rng = test_rng(1006);
  {
    const Hyperpriors h{VectorXd::Zero(2), random_spd(rng, 2), random_spd(rng, 2), 4.0};
    const VariationalGlobal g{VectorXd::Zero(2), random_spd(rng, 2), random_spd(rng, 2) / 7.0, 7.0};
    const auto inv2 = [](const MatrixXd& m) {
      MatrixXd r(2, 2);
      r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
      return MatrixXd(r / (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)));
    };
    const MatrixXd expected = inv2(inv2(h.omega0) + 5.0 * g.omega_dof * g.upsilon);
    expect((update_sigma_zeta(h, g, 5) - expected).cwiseAbs().maxCoeff() <= 1e-10, "sigma_zeta 2x2");
  }

  const Hyperpriors hu{VectorXd::Zero(1), scalar(1.0), scalar(2.0), 2.0};
  const VariationalGlobal gu{VectorXd::Constant(1, 0.5), scalar(0.25), scalar(1.0), 3.0};
  const auto qu = VariationalAgent::diagonal(VectorXd::Zero(1), VectorXd::Zero(1));
  expect(std::abs(update_upsilon(hu, gu, {qu})(0, 0) - 0.5) <= 1e-10, "upsilon scalar");

  expect(compute_omega(6.0, 250) == 256.0, "omega 256");
  expect(compute_omega(5.5, 0) == 5.5, "omega 5.5");
  const ScenarioRun& r = cell(0);
  expect(r.vb.global_var.omega_dof == Hyperpriors::diffuse(3).nu + 250.0, "fitted omega");

  int decreases = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const int K = uniform_int(rng, 1, 4), H = uniform_int(rng, 1, 6);
    const LseApprox approx = rep % 2 ? LseApprox::D1 : LseApprox::D0;
    std::vector<AgentData> agents;
    std::vector<VariationalAgent> q;
    std::vector<VectorXd> mus;
    for (int h = 0; h < H; ++h) {
      agents.push_back(random_agent(rng, 3, 3, K));
      q.push_back(approx == LseApprox::D0 ? VariationalAgent::full(random_vector(rng, K), random_lower(rng, K))
                                          : VariationalAgent::diagonal(random_vector(rng, K), random_vector(rng, K, 0.5)));
      mus.push_back(q.back().mu);
    }
    const ChoiceDataset data(3, K, agents);
    const Hyperpriors hp{random_vector(rng, K), random_spd(rng, K), random_spd(rng, K), K + 1.5};
    const double w = compute_omega(hp.nu, H);
    VariationalGlobal g{random_vector(rng, K), random_spd(rng, K, 0.1), random_spd(rng, K, 0.2) / w, w};
    double before = elbo_hb(q, g, hp, data, approx);
    const auto step = [&](auto update) {
      update();
      const double after = elbo_hb(q, g, hp, data, approx);
      if (after < before - 1e-10) ++decreases;
      before = after;
    };
    step([&] { g.mu_zeta = update_mu_zeta(hp, g, mus); });
    step([&] { g.sigma_zeta = update_sigma_zeta(hp, g, H); });
    step([&] { g.upsilon = update_upsilon(hp, g, q); });
  }
  expect(decreases == 0, "ELBO decreased " + std::to_string(decreases) + " times");

  std::string detail = "scalar/2x2 oracles to 1e-10, omega = nu + H, 90 updates without ELBO decrease";
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  return {failures.empty(), detail};
}

// 7. Accuracy on the desk-scale cells.
Outcome accuracy() {
  std::ostringstream detail;
  bool pass = true;
  const char* names[] = {"H=250 low", "H=250 high", "H=1000 low", "H=1000 high"};
  for (int i = 0; i < 4; ++i) {
    const auto t0 = Clock::now();
    const ScenarioRun& r = cell(i);
    BenchmarkConfig bc;
    bc.seed = r.config.seed + 1;
    const BenchmarkResult res = benchmark_scenario(
        {{"veb", r.veb.params}, {"vb", r.vb.global_var}}, r.truth.params, 3, bc);
    const double secs = r.veb_seconds + r.vb_seconds + seconds_since(t0);
    const double veb = res.median().tv_errors.at("veb");
    const double vb = res.median().tv_errors.at("vb");
    const bool ok = veb <= 2.0 && vb <= 2.0 && secs < 600 && r.veb.converged && r.vb.converged;
    pass = pass && ok;
    detail << (i ? "; " : "") << names[i] << fmt(": VEB %.2f pp, VB %.2f pp, %.0f s", veb, vb, secs)
           << (ok ? "" : " (FAIL)");
  }
  detail << " (limits 2.0 pp, 600 s)";
  return {pass, detail.str()};
}

double f_b(const MatrixXd& b, double r, double p, const MatrixXd& q, const VectorXd& a, const MatrixXd& c) {
  const MatrixXd bbt = b * b.transpose();
  VectorXd u(a.size());
  for (Eigen::Index j = 0; j < a.size(); ++j) u(j) = a(j) + c.row(j).dot(bbt * c.row(j).transpose());
  return r * 2 * log_abs_det(b) - p * (q * bbt).trace() - log_sum_exp(u);
}

struct ConcavityCount {
  int violations = 0;
  double worst = -INFINITY;  // largest 1/2 f(B1) + 1/2 f(B2) - f(mid)
};

ConcavityCount concavity_trials(Rng& rng, bool triangular) {
  ConcavityCount out;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uniform_int(rng, 1, 5), d = uniform_int(rng, 2, 6);
    const double r = uniform(rng, 0.1, 2.0), p = uniform(rng, 0.1, 2.0);
    const MatrixXd g = random_matrix(rng, n, n);
    const MatrixXd q = g * g.transpose() / n;
    const VectorXd a = random_vector(rng, d);
    const MatrixXd c = random_matrix(rng, d, n, 0.5);
    auto sample = [&] {
      MatrixXd b = MatrixXd::Identity(n, n) + random_matrix(rng, n, n, 0.5 / std::sqrt(n));
      if (triangular) {
        b = b.triangularView<Eigen::Lower>();
        b.diagonal() = b.diagonal().cwiseAbs();
      }
      return b;
    };
    MatrixXd b1, b2, mid;
    do {
      b1 = sample();
      b2 = sample();
      mid = (b1 + b2) / 2;
    } while (std::abs(mid.determinant()) < 1e-8 || std::abs(b1.determinant()) < 1e-8 ||
             std::abs(b2.determinant()) < 1e-8);
    const double gap = 0.5 * f_b(b1, r, p, q, a, c) + 0.5 * f_b(b2, r, p, q, a, c) - f_b(mid, r, p, q, a, c);
    out.worst = std::max(out.worst, gap);
    if (gap > 1e-9) ++out.violations;
  }
  return out;
}

// 8. Midpoint concavity of f(B).
Outcome concavity() {
  Rng rng = test_rng(1008);
  const ConcavityCount dense = concavity_trials(rng, false);
  const ConcavityCount lower = concavity_trials(rng, true);
  return {dense.violations == 0,
          fmt("dense full-rank B near I: %d/200 violations (max gap %.2e); lower-triangular B with positive "
              "diagonal: %d/200 violations (max gap %.2e)",
              dense.violations, dense.worst, lower.violations, lower.worst)};
}

// 9. Delta-method diagonal.
Outcome theta() {
  Rng rng = test_rng(1009);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int K = uniform_int(rng, 1, 10), J = uniform_int(rng, 2, 12);
    const MatrixXd x = random_matrix(rng, J, K);
    const VectorXd mu = random_vector(rng, K);
    const auto lse = [&](const VectorXd& v, int k, long double d) {
      long double s = 0;
      for (int j = 0; j < J; ++j) s += std::exp(static_cast<long double>(x.row(j).dot(v)) + d * x(j, k));
      return std::log(s);
    };
    VectorXd fd(K);
    const long double h = 1e-4L;
    for (int k = 0; k < K; ++k)
      fd(k) = static_cast<double>((lse(mu, k, h) - 2 * lse(mu, k, 0) + lse(mu, k, -h)) / (h * h));
    worst = std::max(worst, norm_rel(theta_diag(mu, x), fd));
  }
  return {worst < 1e-5, fmt("100 instances, max rel err %.2e (limit 1e-5)", worst)};
}

// 10. Determinism across thread counts.
Outcome determinism(const fs::path& work) {
  fs::remove_all(work / "det");
  fs::create_directories(work / "det");
  const fs::path sim1 = work / "det" / "sim1", sim4 = work / "det" / "sim4";
  std::vector<std::string> failures;
  const auto run = [&](const std::string& args) {
    const CliResult r = run_tool(args, work / "det");
    if (r.exit_code != 0) failures.push_back("exit " + std::to_string(r.exit_code) + ": " + args);
  };
  run("simulate --seed 7 --threads 1 --out " + sim1.string());
  run("simulate --seed 7 --threads 4 --out " + sim4.string());
  if (read_text(sim1 / "dataset.jsonl") != read_text(sim4 / "dataset.jsonl")) failures.push_back("dataset");
  const std::string data = (sim1 / "dataset.jsonl").string();
  std::vector<std::string> fits1, fits4;
  for (const std::string method : {"veb", "vb"}) {
    for (int threads : {1, 4}) {
      run("fit --seed 7 --method " + method + " --data " + data + " --threads " + std::to_string(threads) +
          " --out " + (work / "det" / ("t" + std::to_string(threads))).string());
    }
    const fs::path a = work / "det" / "t1", b = work / "det" / "t4";
    if (without_runtime(read_json(a / ("fit_" + method + ".json"))).dump() !=
        without_runtime(read_json(b / ("fit_" + method + ".json"))).dump())
      failures.push_back("fit_" + method);
    if (read_text(a / ("state_" + method + ".json")) != read_text(b / ("state_" + method + ".json")))
      failures.push_back("state_" + method);
    fits1.push_back((a / ("fit_" + method + ".json")).string());
    fits4.push_back((b / ("fit_" + method + ".json")).string());
  }
  for (int threads : {1, 4}) {
    const auto& fits = threads == 1 ? fits1 : fits4;
    run("eval --seed 7 --ndraws 50000 --threads " + std::to_string(threads) + " --fit " + fits[0] + " --fit " +
        fits[1] + " --truth " + (sim1 / "truth.json").string() + " --out " +
        (work / "det" / ("e" + std::to_string(threads))).string());
  }
  // The eval report lists its input paths, which differ by directory.
  auto e1 = read_json(work / "det" / "e1" / "eval.json"), e4 = read_json(work / "det" / "e4" / "eval.json");
  e1.erase("inputs");
  e4.erase("inputs");
  if (e1.dump() != e4.dump()) failures.push_back("eval.json");
  if (read_text(work / "det" / "e1" / "eval_tv.csv") != read_text(work / "det" / "e4" / "eval_tv.csv"))
    failures.push_back("eval_tv.csv");

  std::string detail = "threads 1 vs 4: dataset, fit reports (runtime section excluded), states, eval identical";
  if (!failures.empty()) {
    detail = "differences:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vichoice acceptance suite"};
  std::string work_dir = (fs::temp_directory_path() / "vichoice_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "Scratch directory for CLI artifacts");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work_dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"hessian correctness", hessian},
      {"ELBO lower bound", bound},
      {"objective monotonicity", monotonicity},
      {"M-step oracle", mstep_oracle},
      {"HB closed forms", hb_closed_forms},
      {"predictive accuracy", accuracy},
      {"concavity of f(B)", concavity},
      {"delta-method diagonal", theta},
      {"determinism", [&] { return determinism(work_dir); }},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
