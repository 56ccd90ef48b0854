#include "conecoord/instances.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "conecoord/auglag.hpp"
#include "conecoord/rng.hpp"

namespace conecoord {

namespace {

using nlohmann::json;

Eigen::VectorXd to_vector(const json& j) {
  Eigen::VectorXd v(j.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json from_vector(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

double largest_eigenvalue_gram(const Eigen::MatrixXd& A) {
  // B_G for G = 1/2 ||Au - b||^2 is the top eigenvalue of A^T A; computed
  // on the smaller Gram matrix.
  if (A.rows() <= A.cols()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A * A.transpose());
    return es.eigenvalues().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

double EnsvmInstance::constraint_value(const Eigen::VectorXd& u) const {
  return lambda * u.lpNorm<1>() + (1.0 - lambda) * u.squaredNorm() - delta;
}

EnsvmInstance gen_ensvm(int m, int n, int s, double lambda,
                        std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("need m, n >= 1");
  if (s < 1 || s > n) throw std::invalid_argument("need 1 <= s <= n");
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("lambda must lie in [0, 1]");

  Xoshiro256StarStar rng(seed);
  EnsvmInstance inst;
  inst.lambda = lambda;
  inst.sparsity = s;
  inst.seed = seed;

  inst.A.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) inst.A(i, j) = rng.gaussian();

  // Support drawn uniformly without replacement (partial Fisher-Yates).
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < s; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_below(
                           static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  inst.u_true = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < s; ++i)
    inst.u_true(idx[static_cast<std::size_t>(i)]) = rng.gaussian();

  inst.b = inst.A * inst.u_true;
  inst.delta = lambda * inst.u_true.lpNorm<1>() +
               (1.0 - lambda) * inst.u_true.squaredNorm();
  return inst;
}

double ensvm_mu(const EnsvmInstance& inst) {
  DualBoundInput input;
  input.objective_lower_bound = 0.0;
  input.constraint_at_slater = Eigen::VectorXd::Constant(1, -inst.delta);
  return dual_bound_orthant(input, 0.5 * inst.b.squaredNorm());
}

Eigen::VectorXd ensvm_block_update(const EnsvmInstance& inst,
                                   const Eigen::VectorXd& u, int block_start,
                                   int block_len, double q, double eps,
                                   EnsvmGradientSign sign) {
  if (q < 0.0) throw std::invalid_argument("q must be >= 0 (projection output)");
  if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
  if (block_start < 0 || block_len < 1 ||
      block_start + block_len > inst.cols())
    throw std::invalid_argument("block range out of bounds");

  const Eigen::VectorXd residual = inst.A * u - inst.b;
  const Eigen::VectorXd grad =
      inst.A.middleCols(block_start, block_len).transpose() * residual;
  const double grad_sign = sign == EnsvmGradientSign::Descent ? -1.0 : 1.0;
  const double denom = 1.0 + 2.0 * eps * (1.0 - inst.lambda) * q;
  const Eigen::VectorXd r =
      (u.segment(block_start, block_len) + grad_sign * eps * grad) / denom;
  const double threshold = eps * inst.lambda * q / denom;
  return r.unaryExpr([threshold](double x) {
    return std::copysign(std::max(std::abs(x) - threshold, 0.0), x);
  });
}

double ensvm_dual_update(const EnsvmInstance& inst,
                         const Eigen::VectorXd& u_next, double p, double gamma,
                         double mu) {
  const double candidate =
      std::max(p + gamma * inst.constraint_value(u_next), 0.0);
  return std::min(candidate, mu);
}

ProblemSpec ensvm_problem_spec(const EnsvmInstance& inst, int n_blocks) {
  ProblemSpec spec;
  spec.block_sizes = even_block_sizes(inst.cols(), n_blocks);

  auto data = std::make_shared<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>(
      inst.A, inst.b);
  std::vector<Eigen::Index> offsets(spec.block_sizes.size());
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i) {
    offsets[i] = off;
    off += spec.block_sizes[i];
  }

  spec.smooth.value = [data](const BlockVector& u) {
    return 0.5 * (data->first * u.flat() - data->second).squaredNorm();
  };
  spec.smooth.block_grad = [data, offsets](const BlockVector& u,
                                           Eigen::Index i) {
    return (data->first
                .middleCols(offsets[static_cast<std::size_t>(i)],
                            u.block_size(i))
                .transpose() *
            (data->first * u.flat() - data->second))
        .eval();
  };
  spec.smooth.grad_lipschitz = largest_eigenvalue_gram(inst.A);

  const double delta_share = inst.delta / static_cast<double>(n_blocks);
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i)
    spec.constraint.push_back(ElasticNetConstraintBlock{
        inst.lambda, 1.0 - inst.lambda, -delta_share});

  // Subgradient bound lambda sqrt(n) + 2 (1-lambda) R over twice the
  // feasible radius R = sqrt(delta / (1-lambda)); only the step cap sees it.
  const double n_cols = static_cast<double>(inst.cols());
  double radius = 0.0;
  if (inst.lambda < 1.0)
    radius = 2.0 * std::sqrt(inst.delta / (1.0 - inst.lambda));
  spec.constraint_lipschitz = inst.lambda * std::sqrt(n_cols) +
                              2.0 * (1.0 - inst.lambda) * radius;

  spec.cone = ConeSpec::Orthant(1);
  return spec;
}

std::string ensvm_to_json(const EnsvmInstance& inst) {
  json j;
  j["type"] = "ensvm";
  j["m"] = inst.rows();
  j["n"] = inst.cols();
  j["s"] = inst.sparsity;
  j["lambda"] = inst.lambda;
  j["delta"] = inst.delta;
  j["seed"] = inst.seed;
  json rows = json::array();
  for (int i = 0; i < inst.rows(); ++i)
    for (int k = 0; k < inst.cols(); ++k) rows.push_back(inst.A(i, k));
  j["A"] = std::move(rows);
  j["b"] = from_vector(inst.b);
  j["u_true"] = from_vector(inst.u_true);
  return j.dump(2);
}

EnsvmInstance ensvm_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("type", "") != "ensvm")
    throw std::invalid_argument("not an ensvm instance file");
  EnsvmInstance inst;
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  inst.sparsity = j.at("s").get<int>();
  inst.lambda = j.at("lambda").get<double>();
  inst.delta = j.at("delta").get<double>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  const auto& flat = j.at("A");
  if (static_cast<int>(flat.size()) != m * n)
    throw std::invalid_argument("A has wrong size");
  inst.A.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k)
      inst.A(i, k) = flat[static_cast<std::size_t>(i * n + k)].get<double>();
  inst.b = to_vector(j.at("b"));
  inst.u_true = to_vector(j.at("u_true"));
  if (inst.b.size() != m || inst.u_true.size() != n)
    throw std::invalid_argument("b or u_true has wrong size");
  return inst;
}

Eigen::VectorXd SyntheticSaddle::slater_point() const {
  const double shift = (c.dot(a) - d + 1.0) / c.squaredNorm();
  return a - shift * c;
}

SyntheticSaddle gen_synthetic_saddle(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  Xoshiro256StarStar rng(seed);
  SyntheticSaddle s;
  s.seed = seed;
  s.a.resize(dim);
  for (int i = 0; i < dim; ++i) s.a(i) = rng.gaussian();
  do {
    s.c.resize(dim);
    for (int i = 0; i < dim; ++i) s.c(i) = rng.gaussian();
  } while (s.c.norm() < 1e-8);
  // Keep the constraint active: <c, a> - d = gap > 0.
  const double gap = std::abs(rng.gaussian()) + 0.1;
  s.d = s.c.dot(s.a) - gap;
  s.p_star = std::max(0.0, gap / s.c.squaredNorm());
  s.u_star = s.a - s.p_star * s.c;
  return s;
}

ProblemSpec saddle_problem_spec(const SyntheticSaddle& saddle, int n_blocks) {
  ProblemSpec spec;
  const Eigen::Index dim = saddle.a.size();
  spec.block_sizes = even_block_sizes(dim, n_blocks);

  const Eigen::VectorXd a = saddle.a;
  std::vector<Eigen::Index> offsets(spec.block_sizes.size());
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i) {
    offsets[i] = off;
    off += spec.block_sizes[i];
  }

  spec.smooth.value = [a](const BlockVector& u) {
    return 0.5 * (u.flat() - a).squaredNorm();
  };
  spec.smooth.block_grad = [a, offsets](const BlockVector& u, Eigen::Index i) {
    return (u.block(i) -
            a.segment(offsets[static_cast<std::size_t>(i)], u.block_size(i)))
        .eval();
  };
  spec.smooth.grad_lipschitz = 1.0;

  const double d_share = saddle.d / static_cast<double>(n_blocks);
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i) {
    LinearConstraintBlock block;
    block.weights = saddle.c
                        .segment(offsets[i], spec.block_sizes[i])
                        .transpose();
    block.offset = Eigen::VectorXd::Constant(1, -d_share);
    spec.constraint.push_back(std::move(block));
  }
  spec.constraint_lipschitz = saddle.c.norm();
  spec.cone = ConeSpec::Orthant(1);
  return spec;
}

SocInstance gen_soc_instance(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  Xoshiro256StarStar rng(seed);
  SocInstance inst;
  inst.seed = seed;
  inst.a.resize(dim);
  inst.z.resize(dim);
  for (int i = 0; i < dim; ++i) inst.a(i) = rng.gaussian();
  for (int i = 0; i < dim; ++i) inst.z(i) = rng.gaussian();
  inst.rho = 0.25 + 0.25 * rng.uniform01();
  Eigen::VectorXd dir = inst.a - inst.z;
  if (dir.norm() <= inst.rho + 0.1) {
    // push a outward so the ball constraint is active
    const Eigen::VectorXd unit =
        dir.norm() < 1e-12 ? Eigen::VectorXd::Unit(dim, 0) : dir.normalized();
    inst.a = inst.z + (inst.rho + 1.0) * unit;
    dir = inst.a - inst.z;
  }
  const double dist = dir.norm();
  inst.u_star = inst.z + (inst.rho / dist) * dir;
  // stationarity (u* - a) - pbar = 0 and complementarity fix p* on the
  // cone boundary
  inst.p_star.resize(dim + 1);
  inst.p_star(0) = dist - inst.rho;
  inst.p_star.tail(dim) = -((dist - inst.rho) / dist) * dir;
  return inst;
}

ProblemSpec soc_problem_spec(const SocInstance& inst, int n_blocks) {
  ProblemSpec spec;
  const Eigen::Index dim = inst.a.size();
  spec.block_sizes = even_block_sizes(dim, n_blocks);

  const Eigen::VectorXd a = inst.a;
  std::vector<Eigen::Index> offsets(spec.block_sizes.size());
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i) {
    offsets[i] = off;
    off += spec.block_sizes[i];
  }

  spec.smooth.value = [a](const BlockVector& u) {
    return 0.5 * (u.flat() - a).squaredNorm();
  };
  spec.smooth.block_grad = [a, offsets](const BlockVector& u, Eigen::Index i) {
    return (u.block(i) -
            a.segment(offsets[static_cast<std::size_t>(i)], u.block_size(i)))
        .eval();
  };
  spec.smooth.grad_lipschitz = 1.0;

  // Theta(u) = (-rho, z - u): block i contributes -u_i into rows
  // 1 + offset..  plus its share of the constant (-rho, z).
  const double inv_blocks = 1.0 / static_cast<double>(n_blocks);
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i) {
    LinearConstraintBlock block;
    block.weights = Eigen::MatrixXd::Zero(dim + 1, spec.block_sizes[i]);
    block.weights.block(1 + offsets[i], 0, spec.block_sizes[i],
                        spec.block_sizes[i]) =
        -Eigen::MatrixXd::Identity(spec.block_sizes[i], spec.block_sizes[i]);
    block.offset = Eigen::VectorXd::Zero(dim + 1);
    block.offset(0) = -inst.rho * inv_blocks;
    block.offset.tail(dim) = inv_blocks * inst.z;
    spec.constraint.push_back(std::move(block));
  }
  spec.constraint_lipschitz = 1.0;
  spec.cone = ConeSpec::SecondOrder(dim + 1);
  return spec;
}

double soc_mu(const SocInstance& inst) {
  DualBoundInput input;
  input.objective_lower_bound = 0.0;
  input.soc_norm_index = 2.0;
  Eigen::VectorXd theta(inst.a.size() + 1);
  theta(0) = -inst.rho;
  theta.tail(inst.a.size()).setZero();
  input.constraint_at_slater = theta;
  return dual_bound_soc(input, 0.5 * (inst.z - inst.a).squaredNorm());
}

}  // namespace conecoord
