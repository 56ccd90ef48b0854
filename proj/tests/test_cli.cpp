#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "conecoord/errors.hpp"
#include "conecoord/experiment.hpp"
#include "conecoord/trace_io.hpp"

using namespace conecoord;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Strips the trailing wall_ns column from every CSV row.
std::string without_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out << line.substr(0, cut) << '\n';
  }
  return out.str();
}

const char* kDeskConfig = R"({
  "instance": {"type": "ensvm", "m": 10, "n": 30, "s": 3, "lambda": 0.4, "seed": 3},
  "solver": {
    "algorithm": "spdc",
    "blocks": 3,
    "gamma": 1.0,
    "mu": "auto-orthant",
    "schedule": {"alpha": 0.6, "offset": 10, "scale": "auto"},
    "iterations": 2000,
    "trace_every": 50,
    "seeds": [1, 2]
  },
  "output": {"directory": "OUTDIR", "formats": ["csv", "json"]}
})";

std::string desk_config(const std::string& outdir) {
  std::string text = kDeskConfig;
  text.replace(text.find("OUTDIR"), 6, outdir);
  return text;
}

}  // namespace

TEST_CASE("config parsing accepts the documented schema") {
  const ExperimentConfig config = parse_experiment_config(desk_config("x"));
  CHECK(config.instance.type == "ensvm");
  CHECK(config.solver.blocks == 3);
  CHECK(config.solver.seeds.size() == 2);
  CHECK(config.output.formats.size() == 2);
}

TEST_CASE("config validation rejects malformed documents") {
  SUBCASE("unknown keys") {
    CHECK_THROWS_AS(parse_experiment_config(
                        R"({"instance": {"preset": "ensvm-desk"},
                            "solver": {"algorithm": "spdc", "mu": 1.0,
                                       "schedule": {"epsilon": 0.001},
                                       "iterations": 10, "seeds": [1],
                                       "bogus": 3}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"unknown_section": {}})"),
                    ConfigError);
  }
  SUBCASE("missing required keys") {
    CHECK_THROWS_AS(parse_experiment_config(R"({"instance": {}})"),
                    ConfigError);
  }
  SUBCASE("bad values") {
    CHECK_THROWS_AS(
        parse_experiment_config(
            R"({"instance": {"preset": "ensvm-desk"},
                "solver": {"algorithm": "sgd", "mu": 1.0,
                           "schedule": {"epsilon": 0.001},
                           "iterations": 10, "seeds": [1]}})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_experiment_config(
            R"({"instance": {"preset": "ensvm-desk"},
                "solver": {"algorithm": "spdc", "mu": 1.0,
                           "schedule": {"epsilon": 0.001},
                           "iterations": 10, "seeds": []}})"),
        ConfigError);
  }
  SUBCASE("not json at all") {
    CHECK_THROWS_AS(parse_experiment_config("not json"), ConfigError);
  }
  SUBCASE("unknown preset") {
    CHECK_THROWS_AS(instance_preset("ensvm-huge"), ConfigError);
  }
  SUBCASE("presets carry the documented generator parameters") {
    const auto desk = instance_preset("ensvm-desk");
    CHECK(desk.m == 50);
    CHECK(desk.n == 200);
    CHECK(desk.s == 5);
    CHECK(desk.lambda == 0.4);
    const auto fig1 = instance_preset("ensvm-fig1-text");
    CHECK(fig1.m == 200);
    CHECK(fig1.n == 2000);
    CHECK(fig1.s == 10);
  }
}

TEST_CASE("trace csv round-trips losslessly") {
  IterationTrace trace;
  TraceRecord rec;
  rec.k = 17;
  rec.block = 3;
  rec.eps = 0.1 / 3.0;
  rec.objective = 1.0 / 7.0;
  rec.suboptimality = 1e-17;
  rec.feasibility = 3.141592653589793e-5;
  rec.dual_residual = 2.2250738585072014e-308;
  rec.lyapunov = 1234.5678901234567;
  rec.wall_ns = 99999999999;
  trace.records.push_back(rec);
  TraceRecord sparse;
  sparse.k = 18;
  sparse.eps = 0.25;
  sparse.objective = -0.0;
  sparse.feasibility = 0.0;
  sparse.dual_residual = 1.0;
  trace.records.push_back(sparse);

  const std::string csv = trace_to_csv(trace);
  const IterationTrace back = trace_from_csv(csv);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].eps == rec.eps);
  CHECK(back.records[0].objective == rec.objective);
  CHECK(*back.records[0].suboptimality == *rec.suboptimality);
  CHECK(back.records[0].feasibility == rec.feasibility);
  CHECK(back.records[0].dual_residual == rec.dual_residual);
  CHECK(*back.records[0].lyapunov == *rec.lyapunov);
  CHECK(back.records[0].wall_ns == rec.wall_ns);
  CHECK_FALSE(back.records[1].suboptimality.has_value());
  CHECK_FALSE(back.records[1].lyapunov.has_value());

  SUBCASE("empty trace is just the header") {
    const std::string empty_csv = trace_to_csv(IterationTrace{});
    CHECK(empty_csv ==
          "k,block,eps,objective,suboptimality,feasibility,dual_residual,"
          "lyapunov,wall_ns\n");
    CHECK(trace_from_csv(empty_csv).records.empty());
  }
  SUBCASE("corrupt input rejected") {
    CHECK_THROWS(trace_from_csv("bogus header\n1,2,3\n"));
  }
}

TEST_CASE("run_experiment writes traces, mean trace, and summary") {
  const fs::path dir =
      fs::temp_directory_path() / "conecoord_test_run";
  fs::remove_all(dir);
  const ExperimentConfig config =
      parse_experiment_config(desk_config(dir.string()));

  REQUIRE(run_experiment(config, RunOptions{}) == 0);
  CHECK(fs::exists(dir / "trace_seed1.csv"));
  CHECK(fs::exists(dir / "trace_seed2.csv"));
  CHECK(fs::exists(dir / "trace_mean.csv"));
  CHECK(fs::exists(dir / "summary.json"));

  SUBCASE("identical runs produce identical numeric columns") {
    const std::string first = slurp(dir / "trace_seed1.csv");
    const fs::path dir2 =
        fs::temp_directory_path() / "conecoord_test_run2";
    fs::remove_all(dir2);
    RunOptions opts;
    opts.out_override = dir2.string();
    REQUIRE(run_experiment(config, opts) == 0);
    const std::string second = slurp(dir2 / "trace_seed1.csv");
    CHECK(without_wall_column(first) == without_wall_column(second));
    fs::remove_all(dir2);
  }

  SUBCASE("thinning contract: every 50th row plus the final row") {
    const IterationTrace trace = read_trace((dir / "trace_seed1.csv").string());
    CHECK(trace.records.size() == 41);  // 2000/50 rows + final
    CHECK(trace.records.back().k == 2000);
  }

  fs::remove_all(dir);
}

TEST_CASE("run_experiment seed override narrows the seed list") {
  const fs::path dir =
      fs::temp_directory_path() / "conecoord_test_override";
  fs::remove_all(dir);
  const ExperimentConfig config =
      parse_experiment_config(desk_config(dir.string()));
  RunOptions opts;
  opts.seed_override = 9;
  REQUIRE(run_experiment(config, opts) == 0);
  CHECK(fs::exists(dir / "trace_seed9.csv"));
  CHECK_FALSE(fs::exists(dir / "trace_seed1.csv"));
  CHECK_FALSE(fs::exists(dir / "trace_mean.csv"));  // single seed, no mean
  fs::remove_all(dir);
}

TEST_CASE("dry run computes nothing") {
  const fs::path dir = fs::temp_directory_path() / "conecoord_test_dry";
  fs::remove_all(dir);
  const ExperimentConfig config =
      parse_experiment_config(desk_config(dir.string()));
  RunOptions opts;
  opts.dry_run = true;
  CHECK(run_experiment(config, opts) == 0);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("invalid config file maps to exit code 2") {
  CHECK(run_experiment_file("/nonexistent/config.json", RunOptions{}) == 2);
  const fs::path bad = fs::temp_directory_path() / "conecoord_bad.json";
  std::ofstream(bad) << "{\"instance\": {\"preset\": \"nope\"}}";
  CHECK(run_experiment_file(bad.string(), RunOptions{}) == 2);
  fs::remove(bad);
}

TEST_CASE("instance files round-trip through the config loader") {
  const EnsvmInstance inst = gen_ensvm(6, 12, 2, 0.4, 21);
  const fs::path file = fs::temp_directory_path() / "conecoord_inst.json";
  std::ofstream(file) << ensvm_to_json(inst);

  ExperimentConfig::Instance icfg;
  icfg.type = "ensvm";
  icfg.file = file.string();
  const InstanceData data = build_instance(icfg);
  const auto& loaded = std::get<EnsvmInstance>(data);
  CHECK((loaded.A - inst.A).norm() == 0.0);
  CHECK((loaded.b - inst.b).norm() == 0.0);
  CHECK(loaded.delta == inst.delta);
  fs::remove(file);
}

TEST_CASE("soc instance resolves with the auto-soc ball") {
  ExperimentConfig config;
  config.instance.type = "soc-ball";
  config.instance.dim = 4;
  config.instance.seed = 5;
  config.solver.algorithm = "spdc";
  config.solver.blocks = 2;
  config.solver.gamma = 1.0;
  config.solver.mu_mode = ExperimentConfig::MuMode::AutoSoc;
  config.solver.schedule.power_law = true;
  config.solver.schedule.alpha = 0.6;
  config.solver.schedule.offset = 10.0;
  config.solver.iterations = 500;
  config.solver.seeds = {1};

  const ResolvedExperiment resolved = resolve_experiment(config);
  CHECK(resolved.params.cone.is_single_soc());
  CHECK(resolved.params.ball.radius > 1.0);
  const SocInstance& inst = std::get<SocInstance>(resolved.instance);
  CHECK(resolved.params.ball.radius >= inst.p_star.norm());

  // and the solver actually converges on it
  SolverConfig run_cfg = resolved.base_config;
  run_cfg.seed = 1;
  run_cfg.iterations = 30000;
  const SolveResult result =
      run_spdc(resolved.spec, resolved.params, resolved.schedule, run_cfg);
  CHECK((result.u_average.flat() - inst.u_star).norm() <= 5e-2);
}

TEST_CASE("fig1-text preset resolves and dry-runs") {
  ExperimentConfig config = parse_experiment_config(R"({
    "instance": {"preset": "ensvm-fig1-text"},
    "solver": {"algorithm": "spdc", "blocks": 10, "gamma": 1.0,
               "mu": "auto-orthant",
               "schedule": {"alpha": 0.6, "offset": 1000, "scale": "auto"},
               "iterations": 200000, "trace_every": 1000, "seeds": [1]}})");
  RunOptions opts;
  opts.dry_run = true;
  CHECK(run_experiment(config, opts) == 0);
}

TEST_CASE("seed parallelism cap does not change the outputs") {
  const fs::path dir =
      fs::temp_directory_path() / "conecoord_test_threads";
  fs::remove_all(dir);
  const ExperimentConfig config =
      parse_experiment_config(desk_config(dir.string()));
  REQUIRE(run_experiment(config, RunOptions{}) == 0);
  const std::string parallel = slurp(dir / "trace_seed2.csv");

  setenv("CONECOORD_THREADS", "1", 1);
  const fs::path dir2 =
      fs::temp_directory_path() / "conecoord_test_threads1";
  fs::remove_all(dir2);
  RunOptions opts;
  opts.out_override = dir2.string();
  REQUIRE(run_experiment(config, opts) == 0);
  unsetenv("CONECOORD_THREADS");
  const std::string serial = slurp(dir2 / "trace_seed2.csv");
  CHECK(without_wall_column(parallel) == without_wall_column(serial));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
