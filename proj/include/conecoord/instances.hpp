#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "conecoord/model.hpp"

namespace conecoord {

// Elastic-net constrained least squares:
//   min 1/2 ||A u - b||^2  s.t.  lambda ||u||_1 + (1-lambda) ||u||^2 <= delta.
// b = A u_true is stored, and delta equals the elastic-net value of u_true,
// so u_true is feasible and optimal with objective zero.
struct EnsvmInstance {
  Eigen::MatrixXd A;       // m x n
  Eigen::VectorXd b;       // m
  Eigen::VectorXd u_true;  // n, s nonzeros
  double lambda = 0.0;
  double delta = 0.0;
  int sparsity = 0;
  std::uint64_t seed = 0;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }

  // lambda ||u||_1 + (1-lambda) ||u||^2 - delta.
  double constraint_value(const Eigen::VectorXd& u) const;
};

EnsvmInstance gen_ensvm(int m, int n, int s, double lambda, std::uint64_t seed);

// Dual-ball radius ||b||^2 / (2 delta) + 1, i.e. the orthant dual bound with
// Slater point 0 and objective lower bound 0.
double ensvm_mu(const EnsvmInstance& inst);

// Whether the gradient term inside the closed-form block update enters with
// the descent sign (anchor - eps * grad, the minimizer of the block
// subproblem) or with the plus sign as printed in some write-ups. The
// printed variant fails the block-subproblem oracle and is kept only so
// that can be demonstrated.
enum class EnsvmGradientSign { Descent, AsPrinted };

// Closed-form block update: soft threshold of
//   r = (u_i -/+ eps A_i^T (A u - b)) / (1 + 2 eps (1-lambda) q)
// at threshold eps lambda q / (1 + 2 eps (1-lambda) q). `u` is the full
// current iterate; the update touches the coordinate range
// [block_start, block_start + block_len).
Eigen::VectorXd ensvm_block_update(
    const EnsvmInstance& inst, const Eigen::VectorXd& u, int block_start,
    int block_len, double q, double eps,
    EnsvmGradientSign sign = EnsvmGradientSign::Descent);

// Scalar dual step min(max(p + gamma * Theta(u_next), 0), mu), with the full
// constraint value Theta(u) = lambda ||u||_1 + (1-lambda) ||u||^2 - delta.
double ensvm_dual_update(const EnsvmInstance& inst,
                         const Eigen::VectorXd& u_next, double p, double gamma,
                         double mu);

// Builds the generic problem object for the instance with n_blocks blocks
// (equal sizes, remainder absorbed by the last block). Lipschitz defaults:
// B_G is the largest eigenvalue of A A^T, tau bounds the elastic-net
// subgradient over twice the feasible radius.
ProblemSpec ensvm_problem_spec(const EnsvmInstance& inst, int n_blocks);

std::string ensvm_to_json(const EnsvmInstance& inst);
EnsvmInstance ensvm_from_json(const std::string& text);

// Orthant-constrained QP with a closed-form saddle point:
//   min 1/2 ||u - a||^2  s.t.  <c, u> <= d
// with (a, c, d) drawn so the constraint is active;
//   p* = max(0, (<c,a> - d) / ||c||^2),  u* = a - p* c.
struct SyntheticSaddle {
  Eigen::VectorXd a;
  Eigen::VectorXd c;
  double d = 0.0;
  Eigen::VectorXd u_star;
  double p_star = 0.0;
  std::uint64_t seed = 0;

  double optimal_value() const { return 0.5 * (u_star - a).squaredNorm(); }
  // A strictly feasible point with constraint value -1.
  Eigen::VectorXd slater_point() const;
};

SyntheticSaddle gen_synthetic_saddle(int dim, std::uint64_t seed);

ProblemSpec saddle_problem_spec(const SyntheticSaddle& saddle,
                                int n_blocks = 1);

// Second-order-cone instance with a closed-form saddle point:
//   min 1/2 ||u - a||^2  s.t.  ||u - z|| <= rho
// written as Theta(u) = (-rho, z - u) in -C for the second-order cone C,
// with ||a - z|| > rho so the constraint is active;
//   u* = z + rho (a - z)/||a - z||,
//   p* = (||a - z|| - rho) * (1, (a - z)/||a - z||).
struct SocInstance {
  Eigen::VectorXd a;
  Eigen::VectorXd z;
  double rho = 0.0;
  Eigen::VectorXd u_star;
  Eigen::VectorXd p_star;  // dim + 1
  std::uint64_t seed = 0;

  double optimal_value() const { return 0.5 * (u_star - a).squaredNorm(); }
};

SocInstance gen_soc_instance(int dim, std::uint64_t seed);

ProblemSpec soc_problem_spec(const SocInstance& inst, int n_blocks = 1);

// Dual-ball radius from the nu = 2 second-order-cone bound at the Slater
// point z (constraint value (-rho, 0)).
double soc_mu(const SocInstance& inst);

}  // namespace conecoord
