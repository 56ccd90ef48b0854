#include "conecoord/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "conecoord/errors.hpp"

namespace conecoord {

namespace {

void check_cap(double eps0, double cap) {
  if (!(eps0 > 0.0))
    throw ConfigError("step schedule must emit positive steps");
  if (eps0 >= cap)
    throw ConfigError("step schedule starts at " + std::to_string(eps0) +
                      " but the cap N beta / (N B_G + gamma tau^2) is " +
                      std::to_string(cap));
}

}  // namespace

StepSchedule StepSchedule::PowerLaw(double alpha, double scale, double offset,
                                    double cap) {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw ConfigError("power-law exponent must lie in (1/2, 1)");
  if (offset < 1.0) throw ConfigError("power-law offset must be >= 1");
  if (!(scale > 0.0)) throw ConfigError("power-law scale must be > 0");
  StepSchedule s;
  s.power_law_ = true;
  s.alpha_ = alpha;
  s.scale_ = scale;
  s.offset_ = offset;
  s.cap_ = cap;
  check_cap(s.at(0), cap);
  return s;
}

StepSchedule StepSchedule::Explicit(std::vector<double> eps, double cap) {
  if (eps.empty()) throw ConfigError("explicit step sequence is empty");
  for (std::size_t i = 0; i + 1 < eps.size(); ++i)
    if (eps[i + 1] > eps[i])
      throw ConfigError("explicit step sequence must be non-increasing");
  if (!(eps.back() > 0.0))
    throw ConfigError("explicit step sequence must stay positive");
  StepSchedule s;
  s.explicit_eps_ = std::move(eps);
  s.cap_ = cap;
  check_cap(s.explicit_eps_.front(), cap);
  return s;
}

StepSchedule StepSchedule::Constant(double eps, double cap) {
  return Explicit({eps}, cap);
}

double StepSchedule::at(long k) const {
  if (power_law_)
    return scale_ / std::pow(offset_ + static_cast<double>(k), alpha_);
  const auto idx = static_cast<std::size_t>(k);
  if (idx < explicit_eps_.size()) return explicit_eps_[idx];
  return explicit_eps_.back();
}

int draw_block(Xoshiro256StarStar& rng, int block_count) {
  if (block_count < 1) throw std::invalid_argument("need at least one block");
  return static_cast<int>(
      rng.uniform_below(static_cast<std::uint64_t>(block_count)));
}

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x,
                             const std::optional<BoxSet>& box) {
  if (!box) return x;
  return x.cwiseMax(box->lower).cwiseMin(box->upper);
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double x) {
    return std::copysign(std::max(std::abs(x) - t, 0.0), x);
  });
}

}  // namespace

Eigen::VectorXd solve_block_subproblem(const ProblemSpec& spec, Eigen::Index i,
                                       const Eigen::VectorXd& grad_i,
                                       const Eigen::VectorXd& q, double eps,
                                       const Eigen::VectorXd& anchor) {
  if (!spec.core.half_squared_norm)
    throw UnsupportedSubproblem(
        "block updates are implemented for the half-squared-norm core only");
  const auto& theta_i = spec.constraint[static_cast<std::size_t>(i)];
  const auto& j_i = spec.nonsmooth_block(i);
  const auto& box =
      spec.feasible.empty() ? std::optional<BoxSet>{}
                            : spec.feasible[static_cast<std::size_t>(i)];

  if (const auto* lin = std::get_if<LinearConstraintBlock>(&theta_i)) {
    Eigen::VectorXd g = grad_i;
    if (lin->weights.size() > 0) g += lin->weights.transpose() * q;
    return clamp_to_box(j_i.prox(anchor - eps * g, eps), box);
  }

  if (const auto* en = std::get_if<ElasticNetConstraintBlock>(&theta_i)) {
    // min <g, x> + j1 ||x||_1 + q (l1 ||x||_1 + sq ||x||^2) + ||x-a||^2/(2 eps)
    // => scaled soft threshold.
    const double q0 = q(0);
    if (q0 < 0.0)
      throw std::invalid_argument("elastic-net block requires q >= 0");
    double j1 = 0.0;
    if (j_i.kind == ProxFunction::Kind::L1)
      j1 = j_i.l1_weight;
    else if (j_i.kind != ProxFunction::Kind::Zero)
      throw UnsupportedSubproblem(
          "elastic-net constraint block supports only zero or l1 nonsmooth "
          "terms");
    const double denom = 1.0 + 2.0 * eps * en->sq * q0;
    const Eigen::VectorXd r = (anchor - eps * grad_i) / denom;
    const double threshold = eps * (en->l1 * q0 + j1) / denom;
    return clamp_to_box(soft_threshold(r, threshold), box);
  }

  const auto& custom = std::get<CustomConstraintBlock>(theta_i);
  if (!custom.block_solver)
    throw UnsupportedSubproblem(
        "constraint block " + std::to_string(i) +
        " is nonlinear and no block solver was supplied");
  return custom.block_solver(grad_i, q, eps, anchor);
}

BlockVector spdc_block_update(const ProblemSpec& spec,
                              const AugLagParams& params, const BlockVector& u,
                              const Eigen::VectorXd& p, Eigen::Index block_index,
                              double eps) {
  const Eigen::VectorXd q = project_dual_cone(
      params.cone, p + params.gamma * theta_value(spec, u));
  BlockVector next = u;
  next.block(block_index) = solve_block_subproblem(
      spec, block_index, spec.smooth.block_grad(u, block_index), q, eps,
      u.block(block_index));
  return next;
}

Eigen::VectorXd spdc_dual_update(const AugLagParams& params,
                                 const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& theta_u_next) {
  return project_ball(params.ball,
                      project_dual_cone(params.cone,
                                        p + params.gamma * theta_u_next));
}

BlockVector full_primal_update(const ProblemSpec& spec,
                               const AugLagParams& params, const BlockVector& u,
                               const Eigen::VectorXd& p, double eps) {
  const Eigen::VectorXd q = project_dual_cone(
      params.cone, p + params.gamma * theta_value(spec, u));
  BlockVector next = u;
  for (Eigen::Index i = 0; i < u.block_count(); ++i)
    next.block(i) = solve_block_subproblem(
        spec, i, spec.smooth.block_grad(u, i), q, eps, u.block(i));
  return next;
}

namespace {

struct RunAverages {
  BlockVector u_num;
  Eigen::VectorXd p_num;
  double den = 0.0;

  void add(const BlockVector& u, const Eigen::VectorXd& p, double eps) {
    u_num.flat() += eps * u.flat();
    p_num += eps * p;
    den += eps;
  }
};

struct EarlyStop {
  std::optional<double> feasibility_tol;
  std::optional<double> dual_residual_tol;
  int consecutive = 0;

  bool update(double feasibility, double dual_residual) {
    if (!feasibility_tol && !dual_residual_tol) return false;
    const bool feas_ok = !feasibility_tol || feasibility <= *feasibility_tol;
    const bool dual_ok =
        !dual_residual_tol || dual_residual <= *dual_residual_tol;
    consecutive = (feas_ok && dual_ok) ? consecutive + 1 : 0;
    return consecutive >= 100;
  }
};

// Shared driver for SPDC (stochastic, ball-projected dual) and APP-AL
// (all blocks, plain dual). Trace rows describe the state entering
// iteration k: (u^k, p^k, q^k, eps^k) plus the block drawn at k; metrics go
// on the running ergodic average when averaging is enabled.
SolveResult run_loop(const ProblemSpec& spec, const AugLagParams& params,
                     const StepSchedule& schedule, const SolverConfig& config,
                     bool ball_projection, bool stochastic) {
  spec.validate();
  params.validate();
  if (config.iterations < 1) throw ConfigError("iteration budget must be >= 1");
  if (config.trace_every < 1) throw ConfigError("trace thinning must be >= 1");
  if (!config.allow_unsafe_schedule) {
    const double cap = max_step_bound(spec, params.gamma);
    if (schedule.at(0) >= cap)
      throw ConfigError("schedule violates the step condition: eps^0 = " +
                        std::to_string(schedule.at(0)) + " >= " +
                        std::to_string(cap));
  }

  BlockVector u0 = config.initial_u ? *config.initial_u
                                    : BlockVector::Zero(spec.block_sizes);
  if (u0.block_sizes() != spec.block_sizes)
    throw ConfigError("initial point does not match the block structure");
  BlockVector u = spec.project_feasible(u0);
  Eigen::VectorXd p = config.initial_p
                          ? *config.initial_p
                          : Eigen::VectorXd::Zero(spec.cone.dim());
  if (p.size() != spec.cone.dim())
    throw ConfigError("initial multiplier does not match the cone dimension");

  Xoshiro256StarStar rng(config.seed);
  const int n_blocks = static_cast<int>(spec.block_count());

  RunAverages avg{BlockVector::Zero(spec.block_sizes),
                  Eigen::VectorXd::Zero(spec.cone.dim())};
  EarlyStop stopper{config.stop_feasibility, config.stop_dual_residual};
  IterationTrace trace;
  const auto t_start = std::chrono::steady_clock::now();

  Eigen::VectorXd theta_u = theta_value(spec, u);

  // Metrics of the state entering iteration k (block filled in later).
  auto make_record = [&](long k, double eps,
                         const Eigen::VectorXd& q) -> TraceRecord {
    TraceRecord rec;
    rec.k = k;
    rec.eps = eps;
    if (config.averaging && avg.den > 0.0) {
      BlockVector u_bar(avg.u_num.flat() / avg.den, spec.block_sizes);
      rec.objective = spec.objective(u_bar);
      rec.feasibility =
          project_dual_cone(params.cone, theta_value(spec, u_bar)).norm();
    } else {
      rec.objective = spec.objective(u);
      rec.feasibility = project_dual_cone(params.cone, theta_u).norm();
    }
    if (config.known_optimal_value)
      rec.suboptimality = std::abs(rec.objective - *config.known_optimal_value);
    rec.dual_residual = (q - p).norm();
    if (config.lyapunov) rec.lyapunov = config.lyapunov(u, p, eps);
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    return rec;
  };

  long k = 0;
  bool stopped = false;
  for (; k < config.iterations && !stopped; ++k) {
    const double eps = schedule.at(k);
    if (config.observer) config.observer(k, u, p, eps);
    if (config.averaging && (k > 0 || config.include_initial_in_average))
      avg.add(u, p, eps);

    const Eigen::VectorXd q =
        project_dual_cone(params.cone, p + params.gamma * theta_u);

    const bool tracing = (k % config.trace_every == 0);
    TraceRecord rec;
    if (tracing) {
      rec = make_record(k, eps, q);
      stopped = stopper.update(rec.feasibility, rec.dual_residual);
    }

    if (stochastic) {
      const int block = draw_block(rng, n_blocks);
      u.block(block) = solve_block_subproblem(
          spec, block, spec.smooth.block_grad(u, block), q, eps,
          u.block(block));
      rec.block = block;
    } else {
      BlockVector next = u;
      for (Eigen::Index i = 0; i < n_blocks; ++i)
        next.block(i) = solve_block_subproblem(
            spec, i, spec.smooth.block_grad(u, i), q, eps, u.block(i));
      u = std::move(next);
    }

    theta_u = theta_value(spec, u);
    p = ball_projection
            ? spdc_dual_update(params, p, theta_u)
            : project_dual_cone(params.cone, p + params.gamma * theta_u);

    if (tracing) trace.records.push_back(std::move(rec));
  }

  if (config.observer) config.observer(k, u, p, schedule.at(k));
  {
    const Eigen::VectorXd q_final =
        project_dual_cone(params.cone, p + params.gamma * theta_u);
    trace.records.push_back(make_record(k, schedule.at(k), q_final));
  }

  SolveResult result;
  if (config.averaging && avg.den > 0.0) {
    result.u_average = BlockVector(avg.u_num.flat() / avg.den, spec.block_sizes);
    result.p_average = avg.p_num / avg.den;
  } else {
    result.u_average = u;
    result.p_average = p;
  }
  result.u_final = std::move(u);
  result.p_final = std::move(p);
  result.trace = std::move(trace);
  result.iterations_run = k;
  return result;
}

}  // namespace

SolveResult run_spdc(const ProblemSpec& spec, const AugLagParams& params,
                     const StepSchedule& schedule, const SolverConfig& config) {
  return run_loop(spec, params, schedule, config, /*ball_projection=*/true,
                  /*stochastic=*/true);
}

SolveResult run_appal(const ProblemSpec& spec, const AugLagParams& params,
                      double epsilon, const SolverConfig& config) {
  // APP-AL is the single-block specialization, so its step cap is the N = 1
  // value beta / (B_G + gamma tau^2) regardless of the block structure.
  const double denom = spec.smooth.grad_lipschitz +
                       params.gamma * spec.constraint_lipschitz *
                           spec.constraint_lipschitz;
  const double cap = denom == 0.0 ? std::numeric_limits<double>::infinity()
                                  : spec.core.strong_convexity / denom;
  StepSchedule schedule = StepSchedule::Constant(
      epsilon, config.allow_unsafe_schedule
                   ? std::numeric_limits<double>::infinity()
                   : cap);
  SolverConfig cfg = config;
  cfg.allow_unsafe_schedule = true;  // the N=1 cap was just checked
  return run_loop(spec, params, schedule, cfg, /*ball_projection=*/false,
                  /*stochastic=*/false);
}

}  // namespace conecoord
