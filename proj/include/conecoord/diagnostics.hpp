#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "conecoord/auglag.hpp"
#include "conecoord/model.hpp"
#include "conecoord/solver.hpp"

namespace conecoord {

// dist_{-C}(theta) = ||proj_dual(theta)|| (Moreau).
double feasibility_dist(const ConeSpec& cone, const Eigen::VectorXd& theta);

struct SaddleReference {
  BlockVector u_star;
  Eigen::VectorXd p_star;
};

struct QualityReport {
  // |(G+J)(u) - (G+J)(u*)| when a reference or optimal value is known,
  // otherwise the raw objective.
  double suboptimality = 0.0;
  bool suboptimality_is_raw_objective = false;
  double feasibility = 0.0;
  double kkt_complementarity = 0.0;  // |<p, Theta(u)>|
  double kkt_stationarity = 0.0;     // fixed-point residual of the primal map
  std::optional<double> lyapunov;
};

// Lambda(u, p) = D(u*, u) + eps/(2 gamma N) ||p* - p||^2
//              + eps (L(u, p*) - L(u*, p*)).
double lyapunov_value(const ProblemSpec& spec, const AugLagParams& params,
                      const BlockVector& u, const Eigen::VectorXd& p,
                      double eps, const SaddleReference& reference);

// Computes all quality fields; the stationarity residual is
// ||u - full_primal_update(u, p, eps_test)|| / eps_test with
// eps_test = min(1e-3, step cap / 2). The Lyapunov value needs both the
// reference and the current step.
QualityReport kkt_report(const ProblemSpec& spec, const AugLagParams& params,
                         const BlockVector& u, const Eigen::VectorXd& p,
                         const SaddleReference* reference = nullptr,
                         std::optional<double> eps_k = std::nullopt,
                         std::optional<double> optimal_value = std::nullopt);

enum class RateMetric { Suboptimality, Feasibility };

struct RateFit {
  long window_begin_k = 0;  // first iteration index in the fit window
  long window_end_k = 0;
  double slope = 0.0;             // log-log least squares
  double target_exponent = 0.0;   // -(1-alpha)/2 per path, -(1-alpha) in mean
  double envelope_constant = 0.0; // max metric(t) * t^{-target} over window
  bool clipped_nonpositive = false;
};

// Least-squares slope of log(metric) vs log(k) over the post-burn-in window
// of the trace records (k >= 1). With several traces the metric is the
// across-seed mean at each k and the target switches to the expected-rate
// exponent. Nonpositive metric values are clipped at 1e-16 and flagged.
RateFit fit_rate(const std::vector<IterationTrace>& traces, RateMetric metric,
                 double alpha, double burn_in_fraction = 0.1);

struct InequalityPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Both sides of the three saddle-gap inequalities at u, with
// delta = L_gamma(u, p*) - L_gamma(u*, p*):
//   (i)  ||Theta(u) - xi(u, p*)||^2        <= (2/gamma) delta
//   (ii) |(G+J)(u) - (G+J)(u*)|            <= delta + ||p*|| sqrt((2/gamma) delta)
//   (iii)||proj_dual(Theta(u))||^2         <= (2/gamma) delta
struct Lemma52Report {
  InequalityPair slack_distance;   // (i)
  InequalityPair suboptimality;    // (ii)
  InequalityPair feasibility;      // (iii)
};

Lemma52Report lemma52_check(const ProblemSpec& spec, const AugLagParams& params,
                            const BlockVector& u,
                            const SaddleReference& reference);

}  // namespace conecoord
