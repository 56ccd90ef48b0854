#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "conecoord/diagnostics.hpp"
#include "conecoord/errors.hpp"
#include "conecoord/experiment.hpp"
#include "conecoord/instances.hpp"
#include "conecoord/tolerances.hpp"
#include "conecoord/trace_io.hpp"

namespace {

using namespace conecoord;

int gen_instance(const std::string& preset, std::uint64_t seed,
                 const std::string& out_path) {
  try {
    ExperimentConfig::Instance inst_cfg = instance_preset(preset);
    inst_cfg.seed = seed;
    const EnsvmInstance inst =
        gen_ensvm(inst_cfg.m, inst_cfg.n, inst_cfg.s, inst_cfg.lambda, seed);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open " << out_path << " for writing\n";
      return 4;
    }
    out << ensvm_to_json(inst) << '\n';
    if (!out) {
      std::cerr << "failed writing " << out_path << '\n';
      return 4;
    }
    std::cout << "wrote " << out_path << " (m=" << inst.rows()
              << ", n=" << inst.cols() << ", s=" << inst.sparsity
              << ", lambda=" << inst.lambda << ", seed=" << seed << ")\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

bool report(const char* name, bool ok) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << '\n';
  return ok;
}

// Compact self-check of the library invariants: cone projection identities,
// the closed-form gradients of the penalty coupling, draw uniformity, and
// run determinism.
int run_check() {
  bool all_ok = true;
  Xoshiro256StarStar rng(20240911);

  {
    bool moreau = true, orth = true, nonexp = true;
    const std::vector<ConeSpec> cones = {
        ConeSpec::Orthant(6), ConeSpec::SecondOrder(5), ConeSpec::Zero(4),
        ConeSpec::Product({ConeSpec::Orthant(2), ConeSpec::SecondOrder(3)})};
    for (const auto& cone : cones) {
      for (int trial = 0; trial < 10000; ++trial) {
        Eigen::VectorXd y(cone.dim());
        for (Eigen::Index i = 0; i < y.size(); ++i)
          y(i) = 4.0 * rng.gaussian();
        const Eigen::VectorXd dual = project_dual_cone(cone, y);
        const Eigen::VectorXd neg = project_neg_cone(cone, y);
        moreau &= (y - dual - neg).norm() <= tol::kMoreau * (1.0 + y.norm());
        orth &= std::abs(dual.dot(neg)) <=
                tol::kOrthogonality * (1.0 + y.squaredNorm());
        Eigen::VectorXd y2(cone.dim());
        for (Eigen::Index i = 0; i < y2.size(); ++i)
          y2(i) = 4.0 * rng.gaussian();
        nonexp &= (project_dual_cone(cone, y) - project_dual_cone(cone, y2))
                      .norm() <= (y - y2).norm() + 1e-12;
      }
    }
    all_ok &= report("moreau decomposition", moreau);
    all_ok &= report("projection orthogonality", orth);
    all_ok &= report("projection nonexpansiveness", nonexp);
  }

  {
    bool grads = true;
    AugLagParams params;
    params.cone = ConeSpec::Orthant(4);
    params.gamma = 1.3;
    int accepted = 0;
    while (accepted < 200) {
      Eigen::VectorXd theta(4), p(4);
      for (int i = 0; i < 4; ++i) theta(i) = 2.0 * rng.gaussian();
      for (int i = 0; i < 4; ++i) p(i) = std::abs(rng.gaussian());
      const Eigen::VectorXd inner = p + params.gamma * theta;
      if (inner.cwiseAbs().minCoeff() <= tol::kKinkExclusion) continue;
      ++accepted;
      const Eigen::VectorXd g = phi_grad_theta(params, theta, p);
      const double h = 1e-7 * (1.0 + theta.norm());
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd lo = theta, hi = theta;
        lo(i) -= h;
        hi(i) += h;
        const double fd =
            (phi_value(params, hi, p) - phi_value(params, lo, p)) / (2.0 * h);
        grads &= std::abs(fd - g(i)) <=
                 tol::kGradCheck * (1.0 + std::abs(g(i)));
      }
    }
    all_ok &= report("phi gradient vs finite differences", grads);
  }

  {
    bool uniform = true;
    for (int n_blocks : {4, 10, 100}) {
      std::vector<long> counts(static_cast<std::size_t>(n_blocks), 0);
      Xoshiro256StarStar draw_rng(1);
      const long draws = 100000;
      for (long i = 0; i < draws; ++i)
        ++counts[static_cast<std::size_t>(draw_block(draw_rng, n_blocks))];
      const double expect = 1.0 / n_blocks;
      const double band =
          3.0 * std::sqrt(expect * (1.0 - expect) / static_cast<double>(draws));
      for (long c : counts)
        uniform &= std::abs(static_cast<double>(c) / draws - expect) <= band;
    }
    all_ok &= report("block draw uniformity (3 sigma)", uniform);
  }

  {
    const SyntheticSaddle saddle = gen_synthetic_saddle(6, 3);
    const ProblemSpec spec = saddle_problem_spec(saddle);
    AugLagParams params;
    params.cone = spec.cone;
    params.gamma = 1.0;
    DualBoundInput bound;
    const Eigen::VectorXd slater = saddle.slater_point();
    bound.constraint_at_slater =
        Eigen::VectorXd::Constant(1, saddle.c.dot(slater) - saddle.d);
    params.ball = DualBall::Radius(
        dual_bound_orthant(bound, 0.5 * (slater - saddle.a).squaredNorm()));
    SolverConfig config;
    config.iterations = 400;
    config.seed = 11;
    const StepSchedule schedule = StepSchedule::PowerLaw(
        0.6, 0.4 * max_step_bound(spec, params.gamma), 1.0,
        max_step_bound(spec, params.gamma));
    const SolveResult a = run_spdc(spec, params, schedule, config);
    const SolveResult b = run_spdc(spec, params, schedule, config);
    bool deterministic = a.trace.records.size() == b.trace.records.size();
    if (deterministic)
      for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        deterministic &= a.trace.records[i].objective ==
                         b.trace.records[i].objective;
        deterministic &= a.trace.records[i].feasibility ==
                         b.trace.records[i].feasibility;
      }
    all_ok &= report("seeded run determinism", deterministic);
  }

  std::cout << (all_ok ? "all checks passed\n" : "some checks FAILED\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPDC / APP-AL experiment runner for nonlinear convex cone "
               "programs"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  RunOptions options;
  bool dry_run = false;
  std::uint64_t seed_override = 0;
  std::string out_override;
  run->add_flag("--dry-run", dry_run,
                "validate and print the resolved plan without computing");
  auto* seed_opt = run->add_option("--seed-override", seed_override,
                                   "run only this solver seed");
  auto* out_opt =
      run->add_option("--out", out_override, "override the output directory");

  auto* gen = app.add_subcommand("gen", "generate and serialize an instance");
  std::string preset = "ensvm-desk";
  std::uint64_t gen_seed = 0;
  std::string gen_out = "instance.json";
  gen->add_option("preset", preset, "ensvm-desk or ensvm-fig1-text")
      ->required();
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--out", gen_out, "output file")->required();

  auto* check =
      app.add_subcommand("check", "run the library invariant suite");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    options.dry_run = dry_run;
    if (seed_opt->count() > 0) options.seed_override = seed_override;
    if (out_opt->count() > 0) options.out_override = out_override;
    return conecoord::run_experiment_file(config_path, options);
  }
  if (gen->parsed()) return gen_instance(preset, gen_seed, gen_out);
  if (check->parsed()) return run_check();
  return 1;
}
