#include "pgp/pose2.hpp"

#include <cmath>
#include <numbers>

namespace pgp {

double normalize_angle(double angle) {
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

Pose2::Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

Eigen::Matrix2d Pose2::rotation() const {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix3d Pose2::matrix() const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = rotation();
  m(0, 2) = x;
  m(1, 2) = y;
  return m;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.theta + b.theta};
}

Pose2 inverse(const Pose2& a) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return {-c * a.x - s * a.y, s * a.x - c * a.y, -a.theta};
}

Pose2 between(const Pose2& a, const Pose2& b) { return compose(inverse(a), b); }

Eigen::Vector3d difference(const Pose2& a, const Pose2& b) {
  return {b.x - a.x, b.y - a.y, normalize_angle(b.theta - a.theta)};
}

double distance(const Pose2& a, const Pose2& b) { return std::hypot(b.x - a.x, b.y - a.y); }

ComposeJacobians compose_jacobians(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  ComposeJacobians j;
  j.wrt_a << 1, 0, -s * b.x - c * b.y,
             0, 1, c * b.x - s * b.y,
             0, 0, 1;
  j.wrt_b << c, -s, 0,
             s, c, 0,
             0, 0, 1;
  return j;
}

Eigen::Matrix3d inverse_jacobian(const Pose2& a) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  Eigen::Matrix3d j;
  j << -c, -s, s * a.x - c * a.y,
        s, -c, c * a.x + s * a.y,
        0, 0, -1;
  return j;
}

}  // namespace pgp
