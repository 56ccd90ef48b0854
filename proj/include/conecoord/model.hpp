#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "conecoord/cones.hpp"

namespace conecoord {

// A primal point u partitioned into N contiguous blocks. Stored flat so the
// solver can do whole-vector arithmetic; block(i) views stay cheap.
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(Eigen::VectorXd flat, std::vector<Eigen::Index> sizes);

  static BlockVector Zero(std::vector<Eigen::Index> sizes);

  Eigen::Index block_count() const {
    return static_cast<Eigen::Index>(sizes_.size());
  }
  Eigen::Index dim() const { return data_.size(); }
  Eigen::Index block_size(Eigen::Index i) const { return sizes_[i]; }

  Eigen::VectorBlock<Eigen::VectorXd> block(Eigen::Index i) {
    return data_.segment(offsets_[i], sizes_[i]);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> block(Eigen::Index i) const {
    return data_.segment(offsets_[i], sizes_[i]);
  }

  const Eigen::VectorXd& flat() const { return data_; }
  Eigen::VectorXd& flat() { return data_; }
  const std::vector<Eigen::Index>& block_sizes() const { return sizes_; }

  bool same_shape(const BlockVector& other) const {
    return sizes_ == other.sizes_;
  }

 private:
  Eigen::VectorXd data_;
  std::vector<Eigen::Index> sizes_;
  std::vector<Eigen::Index> offsets_;
};

// Splits n coordinates into n_blocks contiguous blocks of size n / n_blocks,
// with the last block absorbing any remainder.
std::vector<Eigen::Index> even_block_sizes(Eigen::Index n, Eigen::Index n_blocks);

// Smooth coupling term G: value, per-block gradient, and the Lipschitz
// constant of the full gradient. Constants are supplied, never estimated.
struct SmoothTerm {
  std::function<double(const BlockVector&)> value;
  std::function<Eigen::VectorXd(const BlockVector&, Eigen::Index)> block_grad;
  double grad_lipschitz = 0.0;  // B_G

  static SmoothTerm Zero();
};

// Separable nonsmooth term J_i, represented by its prox map: for sigma > 0,
// prox(v, sigma) minimizes sigma * J_i(x) + ||x - v||^2 / 2. The kind tag
// lets closed-form block solvers fold simple J_i into their thresholds.
struct ProxFunction {
  enum class Kind { Zero, L1, Other };

  Kind kind = Kind::Zero;
  double l1_weight = 0.0;  // set when kind == L1
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> prox;

  static ProxFunction Zero();
  static ProxFunction L1(double weight);
};

// Constraint block variants. The additive constraint map is
// Theta(u) = sum_i Theta_i(u_i) with values in R^m.
struct LinearConstraintBlock {
  Eigen::MatrixXd weights;  // m x n_i
  Eigen::VectorXd offset;   // this block's share of any constant term
};

// Scalar elastic-net block: l1 * ||u_i||_1 + sq * ||u_i||^2 + offset.
struct ElasticNetConstraintBlock {
  double l1 = 0.0;
  double sq = 0.0;
  double offset = 0.0;
};

// Anything else: a value callable plus (optionally) a solver for the block
// subproblem min <lin, x> + J_i(x) + <q, Theta_i(x)> + ||x - anchor||^2 / (2 eps).
struct CustomConstraintBlock {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& lin,
                                const Eigen::VectorXd& q, double eps,
                                const Eigen::VectorXd& anchor)>
      block_solver;
};

using ConstraintBlock = std::variant<LinearConstraintBlock,
                                     ElasticNetConstraintBlock,
                                     CustomConstraintBlock>;

Eigen::VectorXd constraint_block_value(const ConstraintBlock& block,
                                       Eigen::Index cone_dim,
                                       const Eigen::VectorXd& u_i);

// Per-block feasible set U_i; empty bounds mean all of space.
struct BoxSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Core function K defining the proximal term D(u, v) = K(u) - K(v)
// - <grad K(v), u - v>, with beta-strong convexity and B-Lipschitz gradient.
struct CoreFunction {
  bool half_squared_norm = true;
  double strong_convexity = 1.0;  // beta
  double grad_lipschitz = 1.0;    // B
  std::function<double(const BlockVector&)> value;
  std::function<Eigen::VectorXd(const BlockVector&)> gradient;  // flat

  static CoreFunction HalfSquaredNorm();
  static CoreFunction Custom(std::function<double(const BlockVector&)> value,
                             std::function<Eigen::VectorXd(const BlockVector&)> gradient,
                             double strong_convexity, double grad_lipschitz);
};

// The problem object: block structure, G, per-block J_i and Theta_i, the
// feasible boxes, the cone, and the core function. Immutable once built;
// all evaluations are pure.
struct ProblemSpec {
  std::vector<Eigen::Index> block_sizes;
  SmoothTerm smooth;
  std::vector<ProxFunction> nonsmooth;           // J_i; empty => all zero
  std::vector<ConstraintBlock> constraint;       // Theta_i
  double constraint_lipschitz = 0.0;             // tau
  std::vector<std::optional<BoxSet>> feasible;   // U_i; empty => all of space
  ConeSpec cone = ConeSpec::Orthant(1);
  CoreFunction core = CoreFunction::HalfSquaredNorm();

  // Subgradient growth constants of J (documentation only; no computation
  // in the method uses them).
  double subgrad_c1 = 0.0;
  double subgrad_c2 = 0.0;

  Eigen::Index block_count() const {
    return static_cast<Eigen::Index>(block_sizes.size());
  }
  Eigen::Index dim() const;
  const ProxFunction& nonsmooth_block(Eigen::Index i) const;
  void validate() const;

  double objective(const BlockVector& u) const;      // (G + J)(u)
  double nonsmooth_value(const BlockVector& u) const;  // J(u)
  BlockVector project_feasible(const BlockVector& u) const;
};

// D(u, v) = K(u) - K(v) - <grad K(v), u - v>.
double bregman_d(const CoreFunction& core, const BlockVector& u,
                 const BlockVector& v);

// Theta(u) = sum_i Theta_i(u_i).
Eigen::VectorXd theta_value(const ProblemSpec& spec, const BlockVector& u);

// Step cap from the schedule condition: N beta / (N B_G + gamma tau^2).
double max_step_bound(const ProblemSpec& spec, double gamma);

}  // namespace conecoord
