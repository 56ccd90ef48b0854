#include "conecoord/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace conecoord {

BlockVector::BlockVector(Eigen::VectorXd flat, std::vector<Eigen::Index> sizes)
    : data_(std::move(flat)), sizes_(std::move(sizes)) {
  offsets_.resize(sizes_.size());
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] <= 0)
      throw std::invalid_argument("block sizes must be positive");
    offsets_[i] = offset;
    offset += sizes_[i];
  }
  if (offset != data_.size())
    throw std::invalid_argument("block sizes do not sum to vector length");
}

BlockVector BlockVector::Zero(std::vector<Eigen::Index> sizes) {
  const Eigen::Index n = std::accumulate(sizes.begin(), sizes.end(),
                                         Eigen::Index{0});
  return BlockVector(Eigen::VectorXd::Zero(n), std::move(sizes));
}

std::vector<Eigen::Index> even_block_sizes(Eigen::Index n, Eigen::Index n_blocks) {
  if (n_blocks < 1 || n < n_blocks)
    throw std::invalid_argument("need 1 <= n_blocks <= n");
  const Eigen::Index base = n / n_blocks;
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(n_blocks), base);
  sizes.back() = n - base * (n_blocks - 1);
  return sizes;
}

SmoothTerm SmoothTerm::Zero() {
  SmoothTerm g;
  g.value = [](const BlockVector&) { return 0.0; };
  g.block_grad = [](const BlockVector& u, Eigen::Index i) {
    return Eigen::VectorXd::Zero(u.block_size(i)).eval();
  };
  g.grad_lipschitz = 0.0;
  return g;
}

ProxFunction ProxFunction::Zero() {
  ProxFunction j;
  j.kind = Kind::Zero;
  j.value = [](const Eigen::VectorXd&) { return 0.0; };
  j.prox = [](const Eigen::VectorXd& v, double) { return v; };
  return j;
}

ProxFunction ProxFunction::L1(double weight) {
  if (weight < 0.0) throw std::invalid_argument("L1 weight must be >= 0");
  ProxFunction j;
  j.kind = Kind::L1;
  j.l1_weight = weight;
  j.value = [weight](const Eigen::VectorXd& x) {
    return weight * x.lpNorm<1>();
  };
  j.prox = [weight](const Eigen::VectorXd& v, double sigma) {
    const double t = sigma * weight;
    return v.unaryExpr([t](double x) {
      return std::copysign(std::max(std::abs(x) - t, 0.0), x);
    }).eval();
  };
  return j;
}

Eigen::VectorXd constraint_block_value(const ConstraintBlock& block,
                                       Eigen::Index cone_dim,
                                       const Eigen::VectorXd& u_i) {
  if (const auto* lin = std::get_if<LinearConstraintBlock>(&block)) {
    if (lin->weights.cols() != u_i.size())
      throw std::invalid_argument("linear constraint block shape mismatch");
    Eigen::VectorXd v = lin->weights * u_i;
    if (lin->offset.size() > 0) v += lin->offset;
    return v;
  }
  if (const auto* en = std::get_if<ElasticNetConstraintBlock>(&block)) {
    if (cone_dim != 1)
      throw std::invalid_argument("elastic-net constraint block is scalar");
    Eigen::VectorXd v(1);
    v(0) = en->l1 * u_i.lpNorm<1>() + en->sq * u_i.squaredNorm() + en->offset;
    return v;
  }
  const auto& custom = std::get<CustomConstraintBlock>(block);
  return custom.value(u_i);
}

CoreFunction CoreFunction::HalfSquaredNorm() {
  CoreFunction k;
  k.half_squared_norm = true;
  k.strong_convexity = 1.0;
  k.grad_lipschitz = 1.0;
  k.value = [](const BlockVector& u) { return 0.5 * u.flat().squaredNorm(); };
  k.gradient = [](const BlockVector& u) { return u.flat(); };
  return k;
}

CoreFunction CoreFunction::Custom(
    std::function<double(const BlockVector&)> value,
    std::function<Eigen::VectorXd(const BlockVector&)> gradient,
    double strong_convexity, double grad_lipschitz) {
  if (strong_convexity <= 0.0 || grad_lipschitz < strong_convexity)
    throw std::invalid_argument("core function needs 0 < beta <= B");
  CoreFunction k;
  k.half_squared_norm = false;
  k.strong_convexity = strong_convexity;
  k.grad_lipschitz = grad_lipschitz;
  k.value = std::move(value);
  k.gradient = std::move(gradient);
  return k;
}

Eigen::Index ProblemSpec::dim() const {
  return std::accumulate(block_sizes.begin(), block_sizes.end(),
                         Eigen::Index{0});
}

const ProxFunction& ProblemSpec::nonsmooth_block(Eigen::Index i) const {
  static const ProxFunction zero = ProxFunction::Zero();
  if (nonsmooth.empty()) return zero;
  return nonsmooth[static_cast<std::size_t>(i)];
}

void ProblemSpec::validate() const {
  const auto n_blocks = block_sizes.size();
  if (n_blocks == 0) throw std::invalid_argument("problem has no blocks");
  if (!nonsmooth.empty() && nonsmooth.size() != n_blocks)
    throw std::invalid_argument("nonsmooth block count mismatch");
  if (constraint.size() != n_blocks)
    throw std::invalid_argument("constraint block count mismatch");
  if (!feasible.empty() && feasible.size() != n_blocks)
    throw std::invalid_argument("feasible block count mismatch");
  if (smooth.grad_lipschitz < 0.0 || constraint_lipschitz < 0.0)
    throw std::invalid_argument("negative Lipschitz constant");
}

double ProblemSpec::nonsmooth_value(const BlockVector& u) const {
  if (nonsmooth.empty()) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.block_count(); ++i)
    total += nonsmooth[static_cast<std::size_t>(i)].value(u.block(i));
  return total;
}

double ProblemSpec::objective(const BlockVector& u) const {
  return smooth.value(u) + nonsmooth_value(u);
}

BlockVector ProblemSpec::project_feasible(const BlockVector& u) const {
  if (feasible.empty()) return u;
  BlockVector out = u;
  for (Eigen::Index i = 0; i < u.block_count(); ++i) {
    const auto& box = feasible[static_cast<std::size_t>(i)];
    if (!box) continue;
    out.block(i) = u.block(i).cwiseMax(box->lower).cwiseMin(box->upper);
  }
  return out;
}

double bregman_d(const CoreFunction& core, const BlockVector& u,
                 const BlockVector& v) {
  if (!u.same_shape(v))
    throw std::invalid_argument("bregman_d: shape mismatch");
  if (core.half_squared_norm) return 0.5 * (u.flat() - v.flat()).squaredNorm();
  return core.value(u) - core.value(v) -
         core.gradient(v).dot(u.flat() - v.flat());
}

Eigen::VectorXd theta_value(const ProblemSpec& spec, const BlockVector& u) {
  if (u.block_sizes() != spec.block_sizes)
    throw std::invalid_argument("theta_value: shape mismatch");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(spec.cone.dim());
  for (Eigen::Index i = 0; i < u.block_count(); ++i)
    total += constraint_block_value(spec.constraint[static_cast<std::size_t>(i)],
                                    spec.cone.dim(), u.block(i));
  return total;
}

double max_step_bound(const ProblemSpec& spec, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
  const double beta = spec.core.strong_convexity;
  if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
  if (spec.smooth.grad_lipschitz < 0.0 || spec.constraint_lipschitz < 0.0)
    throw std::invalid_argument("Lipschitz constants must be >= 0");
  const double n_blocks = static_cast<double>(spec.block_count());
  const double denom = n_blocks * spec.smooth.grad_lipschitz +
                       gamma * spec.constraint_lipschitz * spec.constraint_lipschitz;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return n_blocks * beta / denom;
}

}  // namespace conecoord
