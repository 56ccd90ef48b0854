#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conecoord/instances.hpp"
#include "conecoord/solver.hpp"

namespace conecoord {

// Parsed, validated experiment description. The JSON schema is strict:
// unknown keys anywhere are rejected.
struct ExperimentConfig {
  struct Instance {
    std::string type;  // "ensvm", "synthetic-saddle", "soc-ball"
    std::optional<std::string> file;  // load instead of generate
    int m = 0, n = 0, s = 0, dim = 0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
  };

  enum class MuMode { AutoOrthant, AutoSoc, Explicit, Infinite };

  struct Schedule {
    bool power_law = false;
    double alpha = 0.0;
    double offset = 1.0;
    std::optional<double> scale;  // unset => 0.9 * cap * offset^alpha
    std::vector<double> explicit_eps;  // non-power-law (constant for appal)
  };

  struct Solver {
    std::string algorithm;  // "spdc" or "appal"
    int blocks = 1;
    double gamma = 1.0;
    MuMode mu_mode = MuMode::AutoOrthant;
    double mu_value = 0.0;
    Schedule schedule;
    long iterations = 0;
    int trace_every = 1;
    std::vector<std::uint64_t> seeds;
    bool averaging = true;
    bool unsafe_schedule = false;
  };

  struct Output {
    std::string directory;
    std::vector<std::string> formats;  // subset of {"csv", "json"}
  };

  Instance instance;
  Solver solver;
  Output output;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);

ExperimentConfig load_experiment_config(const std::string& path);

// Instance presets named after their generator parameters.
ExperimentConfig::Instance instance_preset(const std::string& name);

using InstanceData =
    std::variant<EnsvmInstance, SyntheticSaddle, SocInstance>;

InstanceData build_instance(const ExperimentConfig::Instance& cfg);

// Everything run_experiment resolves before iterating: the problem object,
// augmented-Lagrangian parameters, schedule, and per-run solver config.
struct ResolvedExperiment {
  InstanceData instance;
  ProblemSpec spec;
  AugLagParams params;
  StepSchedule schedule;
  SolverConfig base_config;           // per-seed copies override `seed`
  std::optional<double> schedule_alpha;
  std::optional<double> optimal_value;
};

ResolvedExperiment resolve_experiment(const ExperimentConfig& config);

struct RunOptions {
  bool dry_run = false;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
};

// Runs every seed (in parallel up to CONECOORD_THREADS), writes per-seed
// trace CSVs, the across-seed mean trace, and a summary JSON. Returns the
// process exit code: 0 ok, 2 invalid config, 3 unsupported subproblem,
// 4 I/O failure.
int run_experiment(const ExperimentConfig& config, const RunOptions& options);

int run_experiment_file(const std::string& config_path,
                        const RunOptions& options);

}  // namespace conecoord
