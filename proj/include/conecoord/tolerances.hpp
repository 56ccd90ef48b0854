#pragma once

// Numerical tolerances used by the library internals and by the invariant
// checks (unit tests, acceptance suite, `conecoord check`). Collected here so
// every check pins the same constants.

namespace conecoord::tol {

// ||y - proj_dual(y) - proj_neg(y)|| <= kMoreau * (1 + ||y||)
inline constexpr double kMoreau = 1e-12;
// |<proj_dual(y), proj_neg(y)>| <= kOrthogonality * (1 + ||y||^2)
inline constexpr double kOrthogonality = 1e-10;
// <z - P(x), x - P(x)> <= kVariational for z in the target set
inline constexpr double kVariational = 1e-10;
// slack on the projection inequality 2<P(z+x)-P(z+y), x> <= ...
inline constexpr double kProjIneq = 1e-10;

// finite-difference gradient agreement (relative error)
inline constexpr double kGradCheck = 1e-5;
// points closer than this to a projection kink are excluded from
// finite-difference checks
inline constexpr double kKinkExclusion = 1e-6;

// midpoint convexity / concavity slack for phi
inline constexpr double kMidpoint = 1e-10;

// below this, ||x_bar|| of a second-order cone point is treated as zero
inline constexpr double kSocZeroDirection = 1e-300;

// agreement between the closed-form augmented Lagrangian and the
// slack-variable grid oracle
inline constexpr double kGridOracle = 1e-4;

// block-update output vs golden-section minimization of the block objective
inline constexpr double kBlockOracle = 1e-6;

// slack for the saddle-gap inequality pairs
inline constexpr double kInequalitySlack = 1e-8;

// dual feasibility of p after a dual step
inline constexpr double kDualFeasibility = 1e-12;

}  // namespace conecoord::tol
