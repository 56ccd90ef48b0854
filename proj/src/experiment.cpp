#include "conecoord/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "conecoord/diagnostics.hpp"
#include "conecoord/errors.hpp"
#include "conecoord/trace_io.hpp"

namespace conecoord {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const char* section,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* key) {
          return item.key() == key;
        }) == allowed.end())
      throw ConfigError(std::string("unknown key \"") + item.key() +
                        "\" in section " + section);
  }
}

const json& require(const json& j, const char* section, const char* key) {
  const auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(std::string("missing key \"") + key + "\" in section " +
                      section);
  return *it;
}

ExperimentConfig::Instance parse_instance(const json& j) {
  reject_unknown_keys(j, "instance",
                      {"preset", "type", "file", "m", "n", "s", "lambda",
                       "dim", "seed"});
  ExperimentConfig::Instance inst;
  if (j.contains("preset")) {
    inst = instance_preset(j.at("preset").get<std::string>());
    if (j.contains("seed")) inst.seed = j.at("seed").get<std::uint64_t>();
    return inst;
  }
  if (j.contains("file")) {
    inst.type = "ensvm";
    inst.file = j.at("file").get<std::string>();
    return inst;
  }
  inst.type = require(j, "instance", "type").get<std::string>();
  inst.seed = j.value("seed", std::uint64_t{0});
  if (inst.type == "ensvm") {
    inst.m = require(j, "instance", "m").get<int>();
    inst.n = require(j, "instance", "n").get<int>();
    inst.s = require(j, "instance", "s").get<int>();
    inst.lambda = require(j, "instance", "lambda").get<double>();
  } else if (inst.type == "synthetic-saddle" || inst.type == "soc-ball") {
    inst.dim = require(j, "instance", "dim").get<int>();
  } else {
    throw ConfigError("unknown instance type \"" + inst.type + "\"");
  }
  return inst;
}

ExperimentConfig::Schedule parse_schedule(const json& j) {
  reject_unknown_keys(j, "solver.schedule",
                      {"alpha", "offset", "scale", "explicit", "epsilon"});
  ExperimentConfig::Schedule sched;
  if (j.contains("alpha")) {
    sched.power_law = true;
    sched.alpha = j.at("alpha").get<double>();
    sched.offset = j.value("offset", 1.0);
    if (j.contains("scale")) {
      if (j.at("scale").is_string()) {
        if (j.at("scale").get<std::string>() != "auto")
          throw ConfigError("schedule scale must be a number or \"auto\"");
      } else {
        sched.scale = j.at("scale").get<double>();
      }
    }
    return sched;
  }
  if (j.contains("epsilon")) {
    sched.explicit_eps = {j.at("epsilon").get<double>()};
    return sched;
  }
  if (j.contains("explicit")) {
    sched.explicit_eps = j.at("explicit").get<std::vector<double>>();
    return sched;
  }
  throw ConfigError("schedule needs either alpha/offset/scale, epsilon, "
                    "or an explicit sequence");
}

ExperimentConfig::Solver parse_solver(const json& j) {
  reject_unknown_keys(j, "solver",
                      {"algorithm", "blocks", "gamma", "mu", "schedule",
                       "iterations", "trace_every", "seeds", "averaging",
                       "unsafe_schedule"});
  ExperimentConfig::Solver solver;
  solver.algorithm = require(j, "solver", "algorithm").get<std::string>();
  if (solver.algorithm != "spdc" && solver.algorithm != "appal")
    throw ConfigError("solver.algorithm must be \"spdc\" or \"appal\"");
  solver.blocks = j.value("blocks", 1);
  if (solver.blocks < 1) throw ConfigError("solver.blocks must be >= 1");
  solver.gamma = j.value("gamma", 1.0);
  if (!(solver.gamma > 0.0)) throw ConfigError("solver.gamma must be > 0");

  const json& mu = require(j, "solver", "mu");
  if (mu.is_string()) {
    const auto mode = mu.get<std::string>();
    if (mode == "auto-orthant")
      solver.mu_mode = ExperimentConfig::MuMode::AutoOrthant;
    else if (mode == "auto-soc")
      solver.mu_mode = ExperimentConfig::MuMode::AutoSoc;
    else if (mode == "infinite")
      solver.mu_mode = ExperimentConfig::MuMode::Infinite;
    else
      throw ConfigError("solver.mu must be auto-orthant, auto-soc, infinite, "
                        "or a number");
  } else if (mu.is_number()) {
    solver.mu_mode = ExperimentConfig::MuMode::Explicit;
    solver.mu_value = mu.get<double>();
    if (solver.mu_value < 0.0) throw ConfigError("solver.mu must be >= 0");
  } else {
    throw ConfigError("solver.mu must be a string mode or a number");
  }

  solver.schedule = parse_schedule(require(j, "solver", "schedule"));
  solver.iterations = require(j, "solver", "iterations").get<long>();
  if (solver.iterations < 1)
    throw ConfigError("solver.iterations must be >= 1");
  solver.trace_every = j.value("trace_every", 1);
  if (solver.trace_every < 1)
    throw ConfigError("solver.trace_every must be >= 1");
  solver.seeds = require(j, "solver", "seeds").get<std::vector<std::uint64_t>>();
  if (solver.seeds.empty()) throw ConfigError("solver.seeds must be nonempty");
  solver.averaging = j.value("averaging", true);
  solver.unsafe_schedule = j.value("unsafe_schedule", false);

  if (solver.algorithm == "appal" &&
      (solver.schedule.power_law || solver.schedule.explicit_eps.size() != 1))
    throw ConfigError("appal uses a constant step: schedule {\"epsilon\": x}");
  return solver;
}

ExperimentConfig::Output parse_output(const json& j) {
  reject_unknown_keys(j, "output", {"directory", "formats"});
  ExperimentConfig::Output out;
  out.directory = j.value("directory", "out");
  out.formats = j.value("formats", std::vector<std::string>{"csv", "json"});
  for (const auto& f : out.formats)
    if (f != "csv" && f != "json")
      throw ConfigError("output.formats entries must be \"csv\" or \"json\"");
  return out;
}

int thread_cap() {
  if (const char* env = std::getenv("CONECOORD_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(j, "top level", {"instance", "solver", "output"});
  ExperimentConfig config;
  config.instance = parse_instance(require(j, "top level", "instance"));
  config.solver = parse_solver(require(j, "top level", "solver"));
  config.output = j.contains("output") ? parse_output(j.at("output"))
                                       : ExperimentConfig::Output{"out",
                                                                  {"csv",
                                                                   "json"}};
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

ExperimentConfig::Instance instance_preset(const std::string& name) {
  ExperimentConfig::Instance inst;
  inst.type = "ensvm";
  if (name == "ensvm-desk") {
    inst.m = 50;
    inst.n = 200;
    inst.s = 5;
    inst.lambda = 0.4;
    inst.seed = 7;
    return inst;
  }
  if (name == "ensvm-fig1-text") {
    inst.m = 200;
    inst.n = 2000;
    inst.s = 10;
    inst.lambda = 0.4;
    inst.seed = 1;
    return inst;
  }
  throw ConfigError("unknown preset \"" + name +
                    "\" (available: ensvm-desk, ensvm-fig1-text)");
}

InstanceData build_instance(const ExperimentConfig::Instance& cfg) {
  if (cfg.file) {
    std::ifstream in(*cfg.file);
    if (!in) throw ConfigError("cannot open instance file " + *cfg.file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return ensvm_from_json(buffer.str());
  }
  if (cfg.type == "ensvm")
    return gen_ensvm(cfg.m, cfg.n, cfg.s, cfg.lambda, cfg.seed);
  if (cfg.type == "synthetic-saddle")
    return gen_synthetic_saddle(cfg.dim, cfg.seed);
  if (cfg.type == "soc-ball") return gen_soc_instance(cfg.dim, cfg.seed);
  throw ConfigError("unknown instance type \"" + cfg.type + "\"");
}

namespace {

ProblemSpec spec_for(const InstanceData& data, int blocks) {
  if (const auto* ensvm = std::get_if<EnsvmInstance>(&data))
    return ensvm_problem_spec(*ensvm, blocks);
  if (const auto* saddle = std::get_if<SyntheticSaddle>(&data))
    return saddle_problem_spec(*saddle, blocks);
  return soc_problem_spec(std::get<SocInstance>(data), blocks);
}

double auto_mu_orthant(const InstanceData& data) {
  if (const auto* ensvm = std::get_if<EnsvmInstance>(&data))
    return ensvm_mu(*ensvm);
  if (const auto* saddle = std::get_if<SyntheticSaddle>(&data)) {
    DualBoundInput input;
    input.objective_lower_bound = 0.0;
    const Eigen::VectorXd slater = saddle->slater_point();
    input.constraint_at_slater =
        Eigen::VectorXd::Constant(1, saddle->c.dot(slater) - saddle->d);
    return dual_bound_orthant(input, 0.5 * (slater - saddle->a).squaredNorm());
  }
  throw ConfigError("auto-orthant mu needs an orthant-cone instance");
}

double auto_mu_soc(const InstanceData& data) {
  if (const auto* soc = std::get_if<SocInstance>(&data)) return soc_mu(*soc);
  throw ConfigError("auto-soc mu needs a second-order-cone instance");
}

std::optional<double> known_optimal_value(const InstanceData& data) {
  if (std::holds_alternative<EnsvmInstance>(data)) return 0.0;
  if (const auto* saddle = std::get_if<SyntheticSaddle>(&data))
    return saddle->optimal_value();
  return std::get<SocInstance>(data).optimal_value();
}

}  // namespace

ResolvedExperiment resolve_experiment(const ExperimentConfig& config) {
  ResolvedExperiment res{build_instance(config.instance),
                         ProblemSpec{},
                         AugLagParams{},
                         StepSchedule::Constant(
                             1.0, std::numeric_limits<double>::infinity()),
                         SolverConfig{},
                         std::nullopt,
                         std::nullopt};
  res.spec = spec_for(res.instance, config.solver.blocks);
  res.params.gamma = config.solver.gamma;
  res.params.cone = res.spec.cone;

  switch (config.solver.mu_mode) {
    case ExperimentConfig::MuMode::AutoOrthant:
      res.params.ball = DualBall::Radius(auto_mu_orthant(res.instance));
      break;
    case ExperimentConfig::MuMode::AutoSoc:
      res.params.ball = DualBall::Radius(auto_mu_soc(res.instance));
      break;
    case ExperimentConfig::MuMode::Explicit:
      res.params.ball = DualBall::Radius(config.solver.mu_value);
      break;
    case ExperimentConfig::MuMode::Infinite:
      res.params.ball = DualBall::Infinite();
      break;
  }

  const double cap = config.solver.unsafe_schedule
                         ? std::numeric_limits<double>::infinity()
                         : max_step_bound(res.spec, res.params.gamma);
  const auto& sched = config.solver.schedule;
  if (sched.power_law) {
    const double scale =
        sched.scale ? *sched.scale
                    : 0.9 * max_step_bound(res.spec, res.params.gamma) *
                          std::pow(sched.offset, sched.alpha);
    res.schedule = StepSchedule::PowerLaw(sched.alpha, scale, sched.offset, cap);
    res.schedule_alpha = sched.alpha;
  } else {
    res.schedule = StepSchedule::Explicit(sched.explicit_eps, cap);
  }

  res.base_config.iterations = config.solver.iterations;
  res.base_config.trace_every = config.solver.trace_every;
  res.base_config.averaging = config.solver.averaging;
  res.base_config.allow_unsafe_schedule = config.solver.unsafe_schedule;
  res.optimal_value = known_optimal_value(res.instance);
  res.base_config.known_optimal_value = res.optimal_value;
  return res;
}

namespace {

json quality_to_json(const QualityReport& q) {
  json j;
  j["suboptimality"] = q.suboptimality;
  j["suboptimality_is_raw_objective"] = q.suboptimality_is_raw_objective;
  j["feasibility"] = q.feasibility;
  j["kkt_complementarity"] = q.kkt_complementarity;
  j["kkt_stationarity"] = q.kkt_stationarity;
  if (q.lyapunov) j["lyapunov"] = *q.lyapunov;
  return j;
}

json rate_to_json(const RateFit& fit) {
  json j;
  j["window_begin_k"] = fit.window_begin_k;
  j["window_end_k"] = fit.window_end_k;
  j["slope"] = fit.slope;
  j["target_exponent"] = fit.target_exponent;
  j["envelope_constant"] = fit.envelope_constant;
  j["clipped_nonpositive"] = fit.clipped_nonpositive;
  return j;
}

// Mean of the numeric columns across seeds at aligned records.
IterationTrace mean_trace(const std::vector<IterationTrace>& traces) {
  IterationTrace mean;
  std::size_t n_records = traces.front().records.size();
  for (const auto& t : traces)
    n_records = std::min(n_records, t.records.size());
  const double inv = 1.0 / static_cast<double>(traces.size());
  for (std::size_t r = 0; r < n_records; ++r) {
    TraceRecord rec;
    rec.k = traces.front().records[r].k;
    rec.block = -1;
    rec.eps = traces.front().records[r].eps;
    bool any_subopt = true, any_lyap = true;
    double subopt = 0.0, lyap = 0.0;
    for (const auto& t : traces) {
      const auto& src = t.records[r];
      rec.objective += src.objective * inv;
      rec.feasibility += src.feasibility * inv;
      rec.dual_residual += src.dual_residual * inv;
      rec.wall_ns += src.wall_ns;
      if (src.suboptimality)
        subopt += *src.suboptimality * inv;
      else
        any_subopt = false;
      if (src.lyapunov)
        lyap += *src.lyapunov * inv;
      else
        any_lyap = false;
    }
    rec.wall_ns /= static_cast<std::int64_t>(traces.size());
    if (any_subopt) rec.suboptimality = subopt;
    if (any_lyap) rec.lyapunov = lyap;
    mean.records.push_back(rec);
  }
  return mean;
}

bool wants_format(const ExperimentConfig::Output& out, const char* fmt) {
  return std::find(out.formats.begin(), out.formats.end(), fmt) !=
         out.formats.end();
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  try {
    ExperimentConfig cfg = config;
    if (options.seed_override) cfg.solver.seeds = {*options.seed_override};
    if (options.out_override) cfg.output.directory = *options.out_override;

    ResolvedExperiment resolved = resolve_experiment(cfg);

    if (options.dry_run) {
      std::cout << "plan:\n"
                << "  instance: " << cfg.instance.type
                << " (dim " << resolved.spec.dim() << ", cone dim "
                << resolved.spec.cone.dim() << ")\n"
                << "  algorithm: " << cfg.solver.algorithm << ", blocks "
                << cfg.solver.blocks << ", gamma " << cfg.solver.gamma
                << ", mu "
                << (resolved.params.ball.is_infinite()
                        ? std::string("infinite")
                        : format_double(resolved.params.ball.radius))
                << "\n"
                << "  eps^0 " << format_double(resolved.schedule.at(0))
                << ", cap "
                << format_double(max_step_bound(resolved.spec,
                                                resolved.params.gamma))
                << ", iterations " << cfg.solver.iterations << "\n"
                << "  seeds:";
      for (auto s : cfg.solver.seeds) std::cout << ' ' << s;
      std::cout << "\n  output: " << cfg.output.directory << "\n";
      return 0;
    }

    std::filesystem::create_directories(cfg.output.directory);

    const std::size_t n_seeds = cfg.solver.seeds.size();
    std::vector<SolveResult> results(n_seeds);
    std::vector<std::exception_ptr> errors(n_seeds);

    const int cap = thread_cap();
    std::size_t next = 0;
    while (next < n_seeds) {
      const std::size_t batch =
          std::min<std::size_t>(static_cast<std::size_t>(cap),
                                n_seeds - next);
      std::vector<std::thread> workers;
      for (std::size_t t = 0; t < batch; ++t) {
        const std::size_t idx = next + t;
        workers.emplace_back([&, idx] {
          try {
            SolverConfig run_cfg = resolved.base_config;
            run_cfg.seed = cfg.solver.seeds[idx];
            results[idx] =
                cfg.solver.algorithm == "appal"
                    ? run_appal(resolved.spec, resolved.params,
                                resolved.schedule.at(0), run_cfg)
                    : run_spdc(resolved.spec, resolved.params,
                               resolved.schedule, run_cfg);
          } catch (...) {
            errors[idx] = std::current_exception();
          }
        });
      }
      for (auto& w : workers) w.join();
      next += batch;
    }
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);

    const auto dir = std::filesystem::path(cfg.output.directory);
    json summary;
    summary["algorithm"] = cfg.solver.algorithm;
    summary["instance_type"] = cfg.instance.type;
    summary["seeds"] = cfg.solver.seeds;
    summary["per_seed"] = json::array();

    std::vector<IterationTrace> traces;
    for (std::size_t i = 0; i < n_seeds; ++i) {
      const auto& result = results[i];
      traces.push_back(result.trace);
      if (wants_format(cfg.output, "csv"))
        write_trace(result.trace,
                    (dir / ("trace_seed" + std::to_string(cfg.solver.seeds[i]) +
                            ".csv"))
                        .string());

      json seed_summary;
      seed_summary["seed"] = cfg.solver.seeds[i];
      seed_summary["iterations_run"] = result.iterations_run;
      const QualityReport quality = kkt_report(
          resolved.spec, resolved.params, result.u_average, result.p_average,
          nullptr, std::nullopt, resolved.optimal_value);
      seed_summary["final"] = quality_to_json(quality);

      // Rate fit only when the records span at least two decades.
      if (resolved.schedule_alpha && result.trace.records.size() >= 12) {
        const auto& records = result.trace.records;
        const long k0 = std::max(records.front().k, 1L);
        if (records.back().k >= 100 * k0) {
          seed_summary["rate"] = rate_to_json(
              fit_rate({result.trace}, RateMetric::Suboptimality,
                       *resolved.schedule_alpha));
        }
      }
      summary["per_seed"].push_back(std::move(seed_summary));
    }

    if (wants_format(cfg.output, "csv") && traces.size() > 1)
      write_trace(mean_trace(traces), (dir / "trace_mean.csv").string());
    if (traces.size() > 1 && resolved.schedule_alpha &&
        traces.front().records.size() >= 12) {
      const auto& records = traces.front().records;
      const long k0 = std::max(records.front().k, 1L);
      if (records.back().k >= 100 * k0)
        summary["mean_rate"] = rate_to_json(
            fit_rate(traces, RateMetric::Suboptimality,
                     *resolved.schedule_alpha));
    }

    if (wants_format(cfg.output, "json")) {
      std::ofstream out(dir / "summary.json", std::ios::binary);
      if (!out) throw std::ios_base::failure("cannot write summary.json");
      out << summary.dump(2) << '\n';
      if (!out) throw std::ios_base::failure("failed writing summary.json");
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedSubproblem& e) {
    std::cerr << "unsupported subproblem: " << e.what() << '\n';
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_experiment_file(const std::string& config_path,
                        const RunOptions& options) {
  try {
    const ExperimentConfig config = load_experiment_config(config_path);
    return run_experiment(config, options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace conecoord
