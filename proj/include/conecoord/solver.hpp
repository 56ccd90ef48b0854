#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "conecoord/auglag.hpp"
#include "conecoord/model.hpp"
#include "conecoord/rng.hpp"

namespace conecoord {

// Non-increasing step sequence eps^k staying strictly below the cap
// N beta / (N B_G + gamma tau^2). The power-law family
// scale / (offset + k)^alpha with alpha in (1/2, 1) and offset >= 1 keeps
// sum eps = inf and sum eps^2 < inf; explicit sequences hold their last
// value beyond the end.
class StepSchedule {
 public:
  static StepSchedule PowerLaw(double alpha, double scale, double offset,
                               double cap);
  static StepSchedule Explicit(std::vector<double> eps, double cap);
  static StepSchedule Constant(double eps, double cap);

  double at(long k) const;
  double cap() const { return cap_; }
  double alpha() const { return alpha_; }

 private:
  StepSchedule() = default;

  bool power_law_ = false;
  double alpha_ = 0.0;
  double scale_ = 0.0;
  double offset_ = 1.0;
  double cap_ = 0.0;
  std::vector<double> explicit_eps_;
};

// One trace record. Objective / suboptimality / feasibility are evaluated
// on the ergodic average when averaging is enabled (that is the object the
// rate results speak about) and on the raw iterate otherwise; the dual
// residual ||q^k - p^k|| and the Lyapunov value always use the raw pair.
struct TraceRecord {
  long k = 0;
  int block = -1;  // drawn block, -1 when no draw happened (final row, APP-AL)
  double eps = 0.0;
  double objective = 0.0;
  std::optional<double> suboptimality;
  double feasibility = 0.0;
  double dual_residual = 0.0;
  std::optional<double> lyapunov;
  std::int64_t wall_ns = 0;
};

struct IterationTrace {
  std::vector<TraceRecord> records;
};

struct SolverConfig {
  long iterations = 1000;
  std::uint64_t seed = 0;
  int trace_every = 1;  // record every k-th iteration (plus a final row)
  bool averaging = true;
  bool include_initial_in_average = true;
  bool allow_unsafe_schedule = false;

  // Optional warm starts; defaults are u0 = 0 projected onto U and p0 = 0.
  std::optional<BlockVector> initial_u;
  std::optional<Eigen::VectorXd> initial_p;

  // Fills the suboptimality trace column when the optimal value is known.
  std::optional<double> known_optimal_value;

  // Early stop once feasibility and dual residual stay below these for 100
  // consecutive records; unset => fixed budget.
  std::optional<double> stop_feasibility;
  std::optional<double> stop_dual_residual;

  // Optional Lyapunov diagnostic Lambda(u, p, eps), recorded per trace row.
  std::function<double(const BlockVector&, const Eigen::VectorXd&, double)>
      lyapunov;

  // Test hook: called at the top of every iteration with (k, u^k, p^k,
  // eps^k) and once after the loop with the final state.
  std::function<void(long, const BlockVector&, const Eigen::VectorXd&, double)>
      observer;
};

struct SolveResult {
  BlockVector u_average;   // sum eps^k u^k / sum eps^k (final iterate if
                           // averaging is off)
  Eigen::VectorXd p_average;
  BlockVector u_final;
  Eigen::VectorXd p_final;
  IterationTrace trace;
  long iterations_run = 0;
};

// Uniform block index in [0, block_count).
int draw_block(Xoshiro256StarStar& rng, int block_count);

// Solves the block subproblem
//   min_{x in U_i} <grad_i, x> + J_i(x) + <q, Theta_i(x)> + ||x - anchor||^2/(2 eps)
// dispatching on the constraint block kind.
Eigen::VectorXd solve_block_subproblem(const ProblemSpec& spec, Eigen::Index i,
                                       const Eigen::VectorXd& grad_i,
                                       const Eigen::VectorXd& q, double eps,
                                       const Eigen::VectorXd& anchor);

// One primal step: returns u^{k+1} differing from u only in the given block.
BlockVector spdc_block_update(const ProblemSpec& spec,
                              const AugLagParams& params, const BlockVector& u,
                              const Eigen::VectorXd& p, Eigen::Index block_index,
                              double eps);

// One dual step: p^{k+1} = P_mu(proj_dual(p + gamma Theta(u_next))).
Eigen::VectorXd spdc_dual_update(const AugLagParams& params,
                                 const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& theta_u_next);

// Applies the block subproblem to every block with gradients frozen at u
// (the APP-AL primal map; also the fixed-point operator used for the
// stationarity residual).
BlockVector full_primal_update(const ProblemSpec& spec,
                               const AugLagParams& params, const BlockVector& u,
                               const Eigen::VectorXd& p, double eps);

// Stochastic primal-dual coordinate run: draw a block uniformly, update it,
// then take the ball-projected dual step; maintains the ergodic averages.
SolveResult run_spdc(const ProblemSpec& spec, const AugLagParams& params,
                     const StepSchedule& schedule, const SolverConfig& config);

// Deterministic baseline: all blocks updated each iteration with a fixed
// step, dual step without the ball projection.
SolveResult run_appal(const ProblemSpec& spec, const AugLagParams& params,
                      double epsilon, const SolverConfig& config);

}  // namespace conecoord
