#include "motok/rotation.hpp"

#include <cmath>
#include <numbers>

namespace motok {

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle == 0.0) {
    return Eigen::Matrix3d::Identity();
  }
  return Eigen::AngleAxisd(angle, rotvec / angle).toRotationMatrix();
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation) {
  // Going through the quaternion keeps the angle accurate near 0 and pi.
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const double sin_half = q.vec().norm();
  if (sin_half == 0.0) {
    return Eigen::Vector3d::Zero();
  }
  const double angle = 2.0 * std::atan2(sin_half, q.w());
  return q.vec() * (angle / sin_half);
}

Eigen::Vector3d normalize_axis_angle(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle <= std::numbers::pi) {
    return rotvec;
  }
  const Eigen::Vector3d axis = rotvec / angle;
  double wrapped = std::fmod(angle, 2.0 * std::numbers::pi);
  if (wrapped > std::numbers::pi) {
    wrapped -= 2.0 * std::numbers::pi;
  }
  return axis * wrapped;
}

Eigen::Matrix3d yaw_matrix(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

double heading_yaw(const Eigen::Matrix3d& rotation) {
  const Eigen::Vector3d forward = rotation * Eigen::Vector3d::UnitZ();
  if (forward.x() == 0.0 && forward.z() == 0.0) {
    return 0.0;
  }
  return std::atan2(forward.x(), forward.z());
}

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(radians + std::numbers::pi, two_pi);
  if (wrapped < 0.0) {
    wrapped += two_pi;
  }
  return wrapped - std::numbers::pi;
}

}  // namespace motok
