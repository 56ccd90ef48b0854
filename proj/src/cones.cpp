#include "conecoord/cones.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "conecoord/tolerances.hpp"

namespace conecoord {

ConeSpec ConeSpec::Orthant(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("orthant cone needs dim >= 1");
  return ConeSpec({{ConeKind::NonnegativeOrthant, dim}}, dim);
}

ConeSpec ConeSpec::SecondOrder(Eigen::Index dim) {
  if (dim < 2) throw std::invalid_argument("second-order cone needs dim >= 2");
  return ConeSpec({{ConeKind::SecondOrderCone, dim}}, dim);
}

ConeSpec ConeSpec::Zero(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("zero cone needs dim >= 1");
  return ConeSpec({{ConeKind::ZeroCone, dim}}, dim);
}

ConeSpec ConeSpec::Product(std::vector<ConeSpec> parts) {
  if (parts.empty()) throw std::invalid_argument("empty cone product");
  std::vector<Segment> segments;
  Eigen::Index dim = 0;
  for (const auto& part : parts) {
    for (const auto& seg : part.segments_) {
      segments.push_back(seg);
      dim += seg.dim;
    }
  }
  return ConeSpec(std::move(segments), dim);
}

bool ConeSpec::is_orthant() const {
  for (const auto& seg : segments_)
    if (seg.kind != ConeKind::NonnegativeOrthant) return false;
  return true;
}

bool ConeSpec::is_single_soc() const {
  return segments_.size() == 1 &&
         segments_.front().kind == ConeKind::SecondOrderCone;
}

namespace {

// Projection onto the (self-dual) second-order cone {x0 >= ||xbar||}.
// Three cases: inside, in the polar, in between. A zero tail direction
// always lands in one of the first two, so no division by ||xbar|| occurs.
Eigen::VectorXd project_soc(const Eigen::VectorXd& x) {
  const double x0 = x(0);
  const double tail_norm = x.tail(x.size() - 1).norm();
  if (tail_norm <= tol::kSocZeroDirection) {
    if (x0 >= 0.0) return x;
    return Eigen::VectorXd::Zero(x.size());
  }
  if (x0 >= tail_norm) return x;
  if (x0 <= -tail_norm) return Eigen::VectorXd::Zero(x.size());
  const double scale = (x0 + tail_norm) / 2.0;
  Eigen::VectorXd out(x.size());
  out(0) = scale;
  out.tail(x.size() - 1) = (scale / tail_norm) * x.tail(x.size() - 1);
  return out;
}

}  // namespace

Eigen::VectorXd project_dual_cone(const ConeSpec& cone, const Eigen::VectorXd& y) {
  if (y.size() != cone.dim())
    throw std::invalid_argument("project_dual_cone: vector length " +
                                std::to_string(y.size()) +
                                " does not match cone dim " +
                                std::to_string(cone.dim()));
  Eigen::VectorXd out(y.size());
  Eigen::Index offset = 0;
  for (const auto& seg : cone.segments()) {
    auto block = y.segment(offset, seg.dim);
    switch (seg.kind) {
      case ConeKind::NonnegativeOrthant:
        out.segment(offset, seg.dim) = block.cwiseMax(0.0);
        break;
      case ConeKind::SecondOrderCone:
        out.segment(offset, seg.dim) = project_soc(block);
        break;
      case ConeKind::ZeroCone:
        // dual of {0} is all of R^m
        out.segment(offset, seg.dim) = block;
        break;
    }
    offset += seg.dim;
  }
  return out;
}

Eigen::VectorXd project_neg_cone(const ConeSpec& cone, const Eigen::VectorXd& y) {
  return y - project_dual_cone(cone, y);
}

DualBall DualBall::Radius(double mu) {
  if (mu < 0.0 || std::isnan(mu))
    throw std::invalid_argument("dual ball radius must be >= 0");
  return DualBall{mu};
}

Eigen::VectorXd project_ball(const DualBall& ball, const Eigen::VectorXd& y) {
  if (ball.is_infinite()) return y;
  const double norm = y.norm();
  if (norm <= ball.radius) return y;
  if (norm == 0.0) return y;
  return (ball.radius / norm) * y;
}

}  // namespace conecoord
