#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace conecoord {

enum class ConeKind { NonnegativeOrthant, SecondOrderCone, ZeroCone };

// A closed convex cone C in R^m, possibly a product of orthant, second-order
// and zero segments. Supplies the two projections the algorithm needs: onto
// the conjugate cone C* and onto -C. Orthant and second-order cones are
// self-dual; the dual of the zero cone is all of R^m.
class ConeSpec {
 public:
  struct Segment {
    ConeKind kind;
    Eigen::Index dim;
  };

  static ConeSpec Orthant(Eigen::Index dim);
  static ConeSpec SecondOrder(Eigen::Index dim);  // dim >= 2, layout (x0, xbar)
  static ConeSpec Zero(Eigen::Index dim);
  static ConeSpec Product(std::vector<ConeSpec> parts);

  Eigen::Index dim() const { return dim_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool is_orthant() const;
  bool is_single_soc() const;

 private:
  ConeSpec(std::vector<Segment> segments, Eigen::Index dim)
      : segments_(std::move(segments)), dim_(dim) {}

  std::vector<Segment> segments_;
  Eigen::Index dim_ = 0;
};

// Euclidean projection of y onto the conjugate cone C*.
Eigen::VectorXd project_dual_cone(const ConeSpec& cone, const Eigen::VectorXd& y);

// Euclidean projection of y onto -C, computed as y - project_dual_cone(y)
// (Moreau decomposition).
Eigen::VectorXd project_neg_cone(const ConeSpec& cone, const Eigen::VectorXd& y);

// Closed ball of radius mu around the origin; the radius may be infinite,
// in which case the projection is the identity.
struct DualBall {
  double radius = std::numeric_limits<double>::infinity();

  static DualBall Infinite() { return DualBall{}; }
  static DualBall Radius(double mu);
  bool is_infinite() const { return std::isinf(radius); }
};

// P_mu(y) = min(1, mu/||y||) y; P_mu(0) = 0.
Eigen::VectorXd project_ball(const DualBall& ball, const Eigen::VectorXd& y);

}  // namespace conecoord
