#ifndef PGP_POSE2_HPP
#define PGP_POSE2_HPP

#include <Eigen/Core>

namespace pgp {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Element of SE(2). The heading is kept in (-pi, pi] by every operation.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_);

  static Pose2 identity() { return {}; }
  static Pose2 from_vector(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

  Eigen::Vector3d vector() const { return {x, y, theta}; }
  Eigen::Vector2d translation() const { return {x, y}; }
  Eigen::Matrix2d rotation() const;
  /// 3x3 homogeneous transform.
  Eigen::Matrix3d matrix() const;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

/// a (+) b: b expressed in the frame of a, mapped to the frame a lives in.
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& a);
/// inverse(a) (+) b, the pose of b seen from a.
Pose2 between(const Pose2& a, const Pose2& b);

/// Component-wise difference b - a with the angle wrapped.
Eigen::Vector3d difference(const Pose2& a, const Pose2& b);

double distance(const Pose2& a, const Pose2& b);

/// Jacobians of compose(a, b) with respect to the vector components of a and b.
struct ComposeJacobians {
  Eigen::Matrix3d wrt_a;
  Eigen::Matrix3d wrt_b;
};
ComposeJacobians compose_jacobians(const Pose2& a, const Pose2& b);

/// Jacobian of inverse(a) with respect to the vector components of a.
Eigen::Matrix3d inverse_jacobian(const Pose2& a);

}  // namespace pgp

#endif  // PGP_POSE2_HPP
