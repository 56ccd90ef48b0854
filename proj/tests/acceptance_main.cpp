// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and thresholds are pinned in code; nothing here is
// calibrated at run time.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "conecoord/diagnostics.hpp"
#include "conecoord/experiment.hpp"
#include "conecoord/instances.hpp"
#include "conecoord/solver.hpp"
#include "conecoord/tolerances.hpp"
#include "conecoord/trace_io.hpp"
#include "oracles.hpp"

using namespace conecoord;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool ok,
            const std::string& detail = "") {
  std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion,
              name, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Eigen::VectorXd random_vector(Xoshiro256StarStar& rng, Eigen::Index dim,
                              double scale = 3.0) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = scale * rng.gaussian();
  return v;
}

// ---------------------------------------------------------------- 1
void criterion_projections() {
  const auto t0 = std::chrono::steady_clock::now();
  Xoshiro256StarStar rng(101);
  std::vector<ConeSpec> cones = {ConeSpec::Orthant(1), ConeSpec::Orthant(10)};
  for (int dim = 2; dim <= 10; ++dim)
    cones.push_back(ConeSpec::SecondOrder(dim));

  bool ok = true;
  for (const auto& cone : cones) {
    for (int trial = 0; trial < 10000; ++trial) {
      const Eigen::VectorXd y = random_vector(rng, cone.dim());
      const Eigen::VectorXd dual = project_dual_cone(cone, y);
      const Eigen::VectorXd neg = project_neg_cone(cone, y);
      ok &= (y - dual - neg).norm() <= tol::kMoreau * (1.0 + y.norm());
      ok &= std::abs(dual.dot(neg)) <=
            tol::kOrthogonality * (1.0 + y.squaredNorm());

      const Eigen::VectorXd y2 = random_vector(rng, cone.dim());
      ok &= (dual - project_dual_cone(cone, y2)).norm() <=
            (y - y2).norm() + 1e-13;

      const Eigen::VectorXd member = project_dual_cone(cone, y2);
      ok &= (member - dual).dot(y - dual) <= tol::kVariational;

      const Eigen::VectorXd x = random_vector(rng, cone.dim());
      const Eigen::VectorXd px = project_dual_cone(cone, y2 + x);
      const Eigen::VectorXd py = project_dual_cone(cone, y2 + y);
      ok &= 2.0 * (px - py).dot(x) <=
            (x - y).squaredNorm() + (px - y2).squaredNorm() -
                (py - y2).squaredNorm() + tol::kProjIneq;
    }
  }
  const double elapsed = seconds_since(t0);
  ok &= elapsed < 5.0;
  std::ostringstream detail;
  detail << "orthant + soc dims 2..10, 1e4 vectors each, " << elapsed << " s";
  report(1,
         "projection identities (moreau, orthogonality, nonexpansive, "
         "variational, three-point)",
         ok, detail.str());
}

// ---------------------------------------------------------------- 2
void criterion_gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Xoshiro256StarStar rng(202);
  bool ok = true;
  int checked = 0;
  for (const bool soc : {false, true}) {
    AugLagParams params;
    params.cone = soc ? ConeSpec::SecondOrder(5) : ConeSpec::Orthant(5);
    params.gamma = soc ? 0.7 : 1.6;
    int accepted = 0;
    while (accepted < 100) {
      Eigen::VectorXd theta = random_vector(rng, 5, 2.0);
      Eigen::VectorXd p = random_vector(rng, 5, 2.0);
      const Eigen::VectorXd inner = p + params.gamma * theta;
      if (soc) {
        const double tail = inner.tail(4).norm();
        if (std::abs(inner(0) - tail) <= tol::kKinkExclusion ||
            std::abs(inner(0) + tail) <= tol::kKinkExclusion)
          continue;
      } else if (inner.cwiseAbs().minCoeff() <= tol::kKinkExclusion) {
        continue;
      }
      ++accepted;
      ++checked;

      const Eigen::VectorXd g_theta = phi_grad_theta(params, theta, p);
      const Eigen::VectorXd g_p = phi_grad_p(params, theta, p);
      const double h = 1e-7 * (1.0 + std::max(theta.norm(), p.norm()));
      for (int i = 0; i < 5; ++i) {
        const double fd_theta = oracle::central_difference(
            [&](const Eigen::VectorXd& t) { return phi_value(params, t, p); },
            theta, i, h);
        ok &= std::abs(fd_theta - g_theta(i)) <=
              tol::kGradCheck * (1.0 + std::abs(g_theta(i)));
        const double fd_p = oracle::central_difference(
            [&](const Eigen::VectorXd& q) {
              return phi_value(params, theta, q);
            },
            p, i, h);
        ok &= std::abs(fd_p - g_p(i)) <=
              tol::kGradCheck * (1.0 + std::abs(g_p(i)));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  ok &= elapsed < 5.0;
  ok &= checked == 200;
  std::ostringstream detail;
  detail << checked << " kink-excluded points, rel err <= 1e-5, " << elapsed
         << " s";
  report(2, "phi gradients vs central differences", ok, detail.str());
}

// ---------------------------------------------------------------- 3
void criterion_reduction() {
  bool ok = true;
  std::ostringstream detail;

  auto compare = [&](const ProblemSpec& spec, const AugLagParams& base,
                     const char* label) {
    const double denom = spec.smooth.grad_lipschitz +
                         base.gamma * spec.constraint_lipschitz *
                             spec.constraint_lipschitz;
    const double cap = spec.core.strong_convexity / denom;
    const double eps = 0.5 * cap;

    std::vector<Eigen::VectorXd> spdc_u, appal_u;
    std::vector<Eigen::VectorXd> spdc_p, appal_p;
    SolverConfig config;
    config.iterations = 500;
    config.seed = 303;

    AugLagParams spdc_params = base;
    spdc_params.ball = DualBall::Infinite();
    SolverConfig cfg_a = config;
    cfg_a.observer = [&](long, const BlockVector& u, const Eigen::VectorXd& p,
                         double) {
      spdc_u.push_back(u.flat());
      spdc_p.push_back(p);
    };
    run_spdc(spec, spdc_params, StepSchedule::Constant(eps, cap), cfg_a);

    SolverConfig cfg_b = config;
    cfg_b.observer = [&](long, const BlockVector& u, const Eigen::VectorXd& p,
                         double) {
      appal_u.push_back(u.flat());
      appal_p.push_back(p);
    };
    run_appal(spec, base, eps, cfg_b);

    double max_gap = 0.0;
    for (std::size_t i = 0; i < spdc_u.size(); ++i) {
      max_gap = std::max(max_gap,
                         (spdc_u[i] - appal_u[i]).cwiseAbs().maxCoeff());
      max_gap = std::max(max_gap,
                         (spdc_p[i] - appal_p[i]).cwiseAbs().maxCoeff());
    }
    ok &= spdc_u.size() == 501 && appal_u.size() == 501;
    ok &= max_gap <= 1e-12;
    detail << label << " max gap " << max_gap << "; ";
  };

  {
    const SyntheticSaddle saddle = gen_synthetic_saddle(6, 11);
    AugLagParams params;
    const ProblemSpec spec = saddle_problem_spec(saddle, 1);
    params.cone = spec.cone;
    params.gamma = 1.0;
    compare(spec, params, "saddle");
  }
  {
    const EnsvmInstance inst = gen_ensvm(10, 40, 4, 0.4, 12);
    const ProblemSpec spec = ensvm_problem_spec(inst, 1);
    AugLagParams params;
    params.cone = spec.cone;
    params.gamma = 1.0;
    compare(spec, params, "ensvm 10x40");
  }
  report(3, "spdc(N=1, mu=inf) reproduces app-al over 500 iterations", ok,
         detail.str());
}

// ---------------------------------------------------------------- 4
void criterion_block_oracle() {
  Xoshiro256StarStar rng(404);
  bool ok = true;
  bool printed_fails_somewhere = false;

  for (int trial = 0; trial < 20; ++trial) {
    const int m = 4 + static_cast<int>(rng.uniform_below(5));
    const int n = 8 + static_cast<int>(rng.uniform_below(9));
    const EnsvmInstance inst =
        gen_ensvm(m, n, 2 + static_cast<int>(rng.uniform_below(3)),
                  0.2 + 0.6 * rng.uniform01(), 4040 + trial);
    Eigen::VectorXd u = random_vector(rng, n, 1.0);
    const double q = std::abs(rng.gaussian()) + 0.05;
    const double eps = 0.01 + 0.2 * rng.uniform01();
    const int len = n / 2;

    // closed-form path
    const Eigen::VectorXd fast = ensvm_block_update(inst, u, 0, len, q, eps);
    const Eigen::VectorXd printed = ensvm_block_update(
        inst, u, 0, len, q, eps, EnsvmGradientSign::AsPrinted);

    // generic path on the same subproblem
    const ProblemSpec spec = ensvm_problem_spec(inst, 2);
    const Eigen::VectorXd grad =
        inst.A.leftCols(len).transpose() * (inst.A * u - inst.b);
    const Eigen::VectorXd generic = solve_block_subproblem(
        spec, 0, grad, Eigen::VectorXd::Constant(1, q), eps, u.head(len));

    for (int i = 0; i < len; ++i) {
      auto objective = [&](double x) {
        return grad(i) * x +
               q * (inst.lambda * std::abs(x) +
                    (1.0 - inst.lambda) * x * x) +
               (x - u(i)) * (x - u(i)) / (2.0 * eps);
      };
      const double bound = std::abs(u(i)) + eps * std::abs(grad(i)) + 1.0;
      const double best =
          oracle::golden_section(objective, -bound, bound, 1e-12);
      ok &= std::abs(fast(i) - best) <= tol::kBlockOracle;
      ok &= std::abs(generic(i) - best) <= tol::kBlockOracle;
      if (std::abs(printed(i) - best) > tol::kBlockOracle)
        printed_fails_somewhere = true;
    }
  }
  ok &= printed_fails_somewhere;
  report(4, "block updates match golden-section minimization (<= 1e-6)", ok,
         printed_fails_somewhere
             ? "as-printed gradient sign rejected by the oracle"
             : "as-printed gradient sign unexpectedly matched");
}

// ------------------------------------------------------------- 5 + 6 + 8
struct DeskRun {
  EnsvmInstance inst;
  ProblemSpec spec;
  AugLagParams params;
  std::vector<SolveResult> results;
  std::vector<double> wall_seconds;
  std::map<long, Eigen::VectorXd> seed1_snapshots;
};

DeskRun run_desk_experiment() {
  DeskRun run{gen_ensvm(50, 200, 5, 0.4, 7), ProblemSpec{}, AugLagParams{},
              {}, {}, {}};
  run.spec = ensvm_problem_spec(run.inst, 10);
  run.params.cone = run.spec.cone;
  run.params.gamma = 1.0;
  run.params.ball = DualBall::Radius(ensvm_mu(run.inst));

  const double cap = max_step_bound(run.spec, run.params.gamma);
  const double alpha = 0.6;
  const double offset = 1000.0;
  const StepSchedule schedule = StepSchedule::PowerLaw(
      alpha, 0.9 * cap * std::pow(offset, alpha), offset, cap);

  const long iterations = 200000;
  const long snapshot_every = iterations / 20;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SolverConfig config;
    config.iterations = iterations;
    config.seed = seed;
    config.trace_every = 100;
    config.known_optimal_value = 0.0;
    if (seed == 1) {
      config.observer = [&run, snapshot_every](long k, const BlockVector& u,
                                               const Eigen::VectorXd&,
                                               double) {
        if (k > 0 && k % snapshot_every == 0)
          run.seed1_snapshots.emplace(k, u.flat());
      };
    }
    const auto t0 = std::chrono::steady_clock::now();
    run.results.push_back(run_spdc(run.spec, run.params, schedule, config));
    run.wall_seconds.push_back(seconds_since(t0));
  }
  return run;
}

double median5(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[2];
}

void criterion_desk_convergence(const DeskRun& run) {
  std::vector<double> subopts, feasibilities;
  for (const auto& result : run.results) {
    const auto& final_row = result.trace.records.back();
    subopts.push_back(*final_row.suboptimality);
    feasibilities.push_back(final_row.feasibility);
  }
  const double med_subopt = median5(subopts);
  const double med_feas = median5(feasibilities);
  const double max_wall =
      *std::max_element(run.wall_seconds.begin(), run.wall_seconds.end());

  bool ok = med_subopt <= 1e-2 && med_feas <= 1e-2 && max_wall < 60.0;
  std::ostringstream detail;
  detail << "median subopt " << med_subopt << ", median feas " << med_feas
         << ", slowest seed " << max_wall << " s";
  report(5, "desk ensvm (m=50,n=200,s=5,N=10) reaches 1e-2 in 2e5 iters", ok,
         detail.str());
}

void criterion_rate_shape(const DeskRun& run) {
  const double alpha = 0.6;
  const double threshold = -(1.0 - alpha) / 2.0 + 0.05;  // -0.15

  std::vector<IterationTrace> traces;
  for (const auto& result : run.results) traces.push_back(result.trace);

  const RateFit mean_fit =
      fit_rate(traces, RateMetric::Suboptimality, alpha);
  bool ok = mean_fit.slope <= threshold;
  ok &= std::isfinite(mean_fit.envelope_constant) &&
        mean_fit.envelope_constant > 0.0;

  int per_seed_pass = 0;
  std::ostringstream detail;
  detail << "mean slope " << mean_fit.slope << " (<= " << threshold
         << "), envelope C " << mean_fit.envelope_constant << ", per-seed";
  for (const auto& result : run.results) {
    const RateFit fit =
        fit_rate({result.trace}, RateMetric::Suboptimality, alpha);
    if (fit.slope <= threshold) ++per_seed_pass;
    detail << ' ' << fit.slope;
  }
  ok &= per_seed_pass >= 4;
  report(6, "rate shape: averaged suboptimality decays like t^-(1-a)/2", ok,
         detail.str());
}

// ---------------------------------------------------------------- 7
void criterion_dual_bounds() {
  bool ok = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const SyntheticSaddle saddle = gen_synthetic_saddle(5, seed);
    DualBoundInput input;
    const Eigen::VectorXd slater = saddle.slater_point();
    input.constraint_at_slater =
        Eigen::VectorXd::Constant(1, saddle.c.dot(slater) - saddle.d);
    input.objective_lower_bound = 0.0;  // unconstrained minimum of G
    const double mu =
        dual_bound_orthant(input, 0.5 * (slater - saddle.a).squaredNorm());
    ok &= mu >= saddle.p_star;
    worst_margin = std::min(worst_margin, mu - saddle.p_star);
  }

  DualBoundInput soc_input;
  soc_input.soc_norm_index = 2.0;
  soc_input.objective_lower_bound = 0.0;
  soc_input.constraint_at_slater = Eigen::Vector2d(2.0, 1.0);
  const double soc_mu_value = dual_bound_soc(soc_input, 1.0);
  ok &= std::abs(soc_mu_value - (1.0 + std::sqrt(2.0))) <= 1e-12;

  std::ostringstream detail;
  detail << "50/50 orthant bounds >= p* (worst margin " << worst_margin
         << "), soc nu=2 example = " << soc_mu_value;
  report(7, "dual-bound validity", ok, detail.str());
}

// ---------------------------------------------------------------- 8
void criterion_lemma52(const DeskRun& run) {
  bool ok = true;

  {
    const SyntheticSaddle saddle = gen_synthetic_saddle(6, 808);
    const ProblemSpec spec = saddle_problem_spec(saddle, 2);
    AugLagParams params;
    params.cone = spec.cone;
    params.gamma = 1.2;
    const SaddleReference ref{BlockVector(saddle.u_star, spec.block_sizes),
                              Eigen::VectorXd::Constant(1, saddle.p_star)};
    Xoshiro256StarStar rng(808);
    for (int trial = 0; trial < 100; ++trial) {
      BlockVector u(saddle.u_star + random_vector(rng, 6, 2.0),
                    spec.block_sizes);
      const Lemma52Report rep = lemma52_check(spec, params, u, ref);
      ok &= rep.slack_distance.lhs <=
            rep.slack_distance.rhs + tol::kInequalitySlack;
      ok &= rep.suboptimality.lhs <=
            rep.suboptimality.rhs + tol::kInequalitySlack;
      ok &= rep.feasibility.lhs <=
            rep.feasibility.rhs + tol::kInequalitySlack;
    }
  }

  // desk snapshots with the bisection multiplier
  const double p_star = oracle::ensvm_dual_bisection(
      run.inst.A, run.inst.b, run.inst.lambda, run.inst.delta,
      ensvm_mu(run.inst));
  const SaddleReference ref{
      BlockVector(run.inst.u_true, run.spec.block_sizes),
      Eigen::VectorXd::Constant(1, p_star)};
  int snapshots = 0;
  for (const auto& [k, flat] : run.seed1_snapshots) {
    BlockVector u(flat, run.spec.block_sizes);
    const Lemma52Report rep = lemma52_check(run.spec, run.params, u, ref);
    ok &= rep.slack_distance.lhs <=
          rep.slack_distance.rhs + tol::kInequalitySlack;
    ok &= rep.suboptimality.lhs <=
          rep.suboptimality.rhs + tol::kInequalitySlack;
    ok &=
        rep.feasibility.lhs <= rep.feasibility.rhs + tol::kInequalitySlack;
    ++snapshots;
  }
  ok &= snapshots == 20;

  std::ostringstream detail;
  detail << "100 saddle points + " << snapshots
         << " desk snapshots, bisection p* = " << p_star;
  report(8, "saddle-gap inequality pairs hold (lhs <= rhs + 1e-8)", ok,
         detail.str());
}

// ---------------------------------------------------------------- 9
void criterion_lyapunov() {
  const SyntheticSaddle saddle = gen_synthetic_saddle(8, 909);
  const ProblemSpec spec = saddle_problem_spec(saddle, 4);
  AugLagParams params;
  params.cone = spec.cone;
  params.gamma = 1.0;
  DualBoundInput bound;
  const Eigen::VectorXd slater = saddle.slater_point();
  bound.constraint_at_slater =
      Eigen::VectorXd::Constant(1, saddle.c.dot(slater) - saddle.d);
  params.ball = DualBall::Radius(
      dual_bound_orthant(bound, 0.5 * (slater - saddle.a).squaredNorm()));

  const SaddleReference ref{BlockVector(saddle.u_star, spec.block_sizes),
                            Eigen::VectorXd::Constant(1, saddle.p_star)};

  SolverConfig config;
  config.iterations = 20000;
  config.seed = 5;
  config.trace_every = 20;
  config.lyapunov = [&](const BlockVector& u, const Eigen::VectorXd& p,
                        double eps) {
    return lyapunov_value(spec, params, u, p, eps, ref);
  };
  std::map<long, Eigen::VectorXd> snapshots;
  config.observer = [&](long k, const BlockVector& u, const Eigen::VectorXd&,
                        double) {
    if (k % config.trace_every == 0) snapshots.emplace(k, u.flat());
  };

  const double cap = max_step_bound(spec, params.gamma);
  const StepSchedule schedule = StepSchedule::PowerLaw(0.6, 0.8 * cap, 1.0, cap);
  const SolveResult result = run_spdc(spec, params, schedule, config);

  bool ok = true;
  const double beta = spec.core.strong_convexity;
  double max_lambda = 0.0;
  for (const auto& rec : result.trace.records) {
    if (!rec.lyapunov) {
      ok = false;
      continue;
    }
    const auto it = snapshots.find(rec.k);
    if (it == snapshots.end()) continue;  // no observer row for the final k
    const double dist2 = (it->second - saddle.u_star).squaredNorm();
    ok &= *rec.lyapunov >= 0.5 * beta * dist2 - 1e-12;
    max_lambda = std::max(max_lambda, *rec.lyapunov);
  }
  ok &= std::isfinite(max_lambda);

  const auto& records = result.trace.records;
  const std::size_t tenth = records.size() / 10;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < tenth; ++i) {
    first += *records[i].lyapunov;
    last += *records[records.size() - 1 - i].lyapunov;
  }
  ok &= last < first;

  std::ostringstream detail;
  detail << "max Lambda " << max_lambda << ", first-decade mean "
         << first / tenth << ", last-decade mean " << last / tenth;
  report(9, "Lyapunov bound Lambda >= beta/2 ||u - u*||^2 on every record",
         ok, detail.str());
}

// ---------------------------------------------------------------- 10
void criterion_determinism() {
  bool ok = true;

  // identical seeds -> byte-identical numeric columns
  const fs::path dir_a = fs::temp_directory_path() / "conecoord_accept_a";
  const fs::path dir_b = fs::temp_directory_path() / "conecoord_accept_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  ExperimentConfig config;
  config.instance = instance_preset("ensvm-desk");
  config.solver.algorithm = "spdc";
  config.solver.blocks = 10;
  config.solver.gamma = 1.0;
  config.solver.mu_mode = ExperimentConfig::MuMode::AutoOrthant;
  config.solver.schedule.power_law = true;
  config.solver.schedule.alpha = 0.6;
  config.solver.schedule.offset = 1000.0;
  config.solver.iterations = 20000;
  config.solver.trace_every = 100;
  config.solver.seeds = {1, 2};
  config.output.directory = dir_a.string();
  config.output.formats = {"csv"};

  ok &= run_experiment(config, RunOptions{}) == 0;
  RunOptions opts;
  opts.out_override = dir_b.string();
  ok &= run_experiment(config, opts) == 0;

  auto strip_wall = [](const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
      out << line.substr(0, line.rfind(',')) << '\n';
    return out.str();
  };
  for (const char* name : {"trace_seed1.csv", "trace_seed2.csv"}) {
    const std::string a = strip_wall(dir_a / name);
    const std::string b = strip_wall(dir_b / name);
    ok &= !a.empty() && a == b;
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  // block-frequency band
  for (int n_blocks : {4, 10, 100}) {
    std::vector<long> counts(static_cast<std::size_t>(n_blocks), 0);
    Xoshiro256StarStar rng(1);
    const long draws = 100000;
    for (long i = 0; i < draws; ++i)
      ++counts[static_cast<std::size_t>(draw_block(rng, n_blocks))];
    const double expect = 1.0 / n_blocks;
    const double band = 3.0 * std::sqrt(expect * (1.0 - expect) /
                                        static_cast<double>(draws));
    for (long c : counts)
      ok &= std::abs(static_cast<double>(c) / draws - expect) <= band;
  }

  report(10, "trace determinism and uniform block draws (3 sigma)", ok);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_projections();
  criterion_gradient_oracle();
  criterion_reduction();
  criterion_block_oracle();

  const DeskRun desk = run_desk_experiment();
  criterion_desk_convergence(desk);
  criterion_rate_shape(desk);
  criterion_dual_bounds();
  criterion_lemma52(desk);
  criterion_lyapunov();
  criterion_determinism();

  if (g_failures == 0) {
    std::printf("all 10 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
