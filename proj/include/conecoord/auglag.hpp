#pragma once

#include <Eigen/Dense>
#include <optional>

#include "conecoord/cones.hpp"
#include "conecoord/model.hpp"

namespace conecoord {

// Penalty parameter, cone, and dual ball of the augmented Lagrangian layer.
struct AugLagParams {
  double gamma = 1.0;
  ConeSpec cone = ConeSpec::Orthant(1);
  DualBall ball = DualBall::Infinite();

  void validate() const;
};

// phi(theta, p) = (||P(p + gamma theta)||^2 - ||p||^2) / (2 gamma), where P
// projects onto C*. Convex in theta, concave in p, differentiable in both.
double phi_value(const AugLagParams& params, const Eigen::VectorXd& theta,
                 const Eigen::VectorXd& p);

// grad_theta phi = P(p + gamma theta).
Eigen::VectorXd phi_grad_theta(const AugLagParams& params,
                               const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& p);

// grad_p phi = (P(p + gamma theta) - p) / gamma.
Eigen::VectorXd phi_grad_p(const AugLagParams& params,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& p);

// Ordinary Lagrangian L(u, p) = (G + J)(u) + <p, Theta(u)>.
double lagrangian_value(const ProblemSpec& spec, const BlockVector& u,
                        const Eigen::VectorXd& p);

// Augmented Lagrangian L_gamma(u, p) = (G + J)(u) + phi(Theta(u), p).
double eval_L_gamma(const ProblemSpec& spec, const AugLagParams& params,
                    const BlockVector& u, const Eigen::VectorXd& p);

// Minimizer of the slack subproblem: xi(u, p) = proj_{-C}(Theta(u) + p / gamma).
Eigen::VectorXd xi_opt(const ProblemSpec& spec, const AugLagParams& params,
                       const BlockVector& u, const Eigen::VectorXd& p);

// Inputs for the dual-bound estimators: a strictly feasible point, its
// constraint value, and a lower bound on the optimal objective (0 is valid
// for nonnegative objectives).
struct DualBoundInput {
  double objective_lower_bound = 0.0;
  Eigen::VectorXd constraint_at_slater;
  // Holder exponent nu for the second-order cone bound (nu > 1).
  std::optional<double> soc_norm_index;
};

// Orthant cone: mu = (objective(slater) - lower) / min_j(-Theta^j(slater)) + 1.
double dual_bound_orthant(const DualBoundInput& input,
                          double objective_at_slater);

// Second-order cone K_nu: with 1/omega + 1/nu = 1 and Theta(slater) =
// (theta0, thetabar),
//   mu = m^{max((omega-2)/(2 omega), 0)} * 2^{1/omega}
//        * (objective(slater) - lower) / (|theta0| - ||thetabar||_nu) + 1.
// The denominator uses |theta0|: a strictly interior Theta(slater) has
// theta0 < -||thetabar||_nu, so the magnitude is what makes the quotient
// positive.
double dual_bound_soc(const DualBoundInput& input, double objective_at_slater);

}  // namespace conecoord
