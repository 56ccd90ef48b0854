#include "conecoord/auglag.hpp"

#include <cmath>
#include <stdexcept>

#include "conecoord/errors.hpp"

namespace conecoord {

void AugLagParams::validate() const {
  if (gamma <= 0.0 || std::isnan(gamma))
    throw std::invalid_argument("gamma must be > 0");
  if (ball.radius < 0.0) throw std::invalid_argument("mu must be >= 0");
}

double phi_value(const AugLagParams& params, const Eigen::VectorXd& theta,
                 const Eigen::VectorXd& p) {
  params.validate();
  const Eigen::VectorXd proj =
      project_dual_cone(params.cone, p + params.gamma * theta);
  return (proj.squaredNorm() - p.squaredNorm()) / (2.0 * params.gamma);
}

Eigen::VectorXd phi_grad_theta(const AugLagParams& params,
                               const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& p) {
  params.validate();
  return project_dual_cone(params.cone, p + params.gamma * theta);
}

Eigen::VectorXd phi_grad_p(const AugLagParams& params,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& p) {
  params.validate();
  const Eigen::VectorXd proj =
      project_dual_cone(params.cone, p + params.gamma * theta);
  return (proj - p) / params.gamma;
}

double lagrangian_value(const ProblemSpec& spec, const BlockVector& u,
                        const Eigen::VectorXd& p) {
  return spec.objective(u) + p.dot(theta_value(spec, u));
}

double eval_L_gamma(const ProblemSpec& spec, const AugLagParams& params,
                    const BlockVector& u, const Eigen::VectorXd& p) {
  return spec.objective(u) + phi_value(params, theta_value(spec, u), p);
}

Eigen::VectorXd xi_opt(const ProblemSpec& spec, const AugLagParams& params,
                       const BlockVector& u, const Eigen::VectorXd& p) {
  params.validate();
  return project_neg_cone(params.cone,
                          theta_value(spec, u) + p / params.gamma);
}

double dual_bound_orthant(const DualBoundInput& input,
                          double objective_at_slater) {
  const auto& theta = input.constraint_at_slater;
  if (theta.size() == 0)
    throw std::invalid_argument("empty constraint value at the Slater point");
  if ((theta.array() >= 0.0).any())
    throw SlaterViolation(
        "dual_bound_orthant: point is not strictly feasible (some "
        "constraint component >= 0)");
  const double numerator = objective_at_slater - input.objective_lower_bound;
  if (numerator < 0.0)
    throw std::invalid_argument(
        "objective lower bound exceeds the objective at the Slater point");
  return numerator / (-theta.maxCoeff()) + 1.0;
}

double dual_bound_soc(const DualBoundInput& input, double objective_at_slater) {
  const auto& theta = input.constraint_at_slater;
  if (theta.size() < 2)
    throw std::invalid_argument("second-order cone bound needs dim >= 2");
  const double nu = input.soc_norm_index.value_or(2.0);
  if (nu <= 1.0) throw std::invalid_argument("nu must be > 1");
  const double omega = nu / (nu - 1.0);

  const double theta0 = theta(0);
  const auto tail = theta.tail(theta.size() - 1);
  const double tail_nu_norm =
      std::pow(tail.array().abs().pow(nu).sum(), 1.0 / nu);
  const double denom = std::abs(theta0) - tail_nu_norm;
  if (denom <= 0.0)
    throw SlaterViolation(
        "dual_bound_soc: point is not strictly feasible "
        "(|theta0| <= ||thetabar||_nu)");

  const double numerator = objective_at_slater - input.objective_lower_bound;
  if (numerator < 0.0)
    throw std::invalid_argument(
        "objective lower bound exceeds the objective at the Slater point");

  const double m = static_cast<double>(theta.size() - 1);
  const double m_exp = std::max((omega - 2.0) / (2.0 * omega), 0.0);
  return std::pow(m, m_exp) * std::pow(2.0, 1.0 / omega) * numerator / denom +
         1.0;
}

}  // namespace conecoord
