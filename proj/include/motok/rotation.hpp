#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace motok {

/// Rotation matrix for an axis-angle vector (direction = axis, norm = angle in radians).
Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& rotvec);

/// Inverse of axis_angle_to_matrix. The returned angle lies in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation);

/// Wraps the rotation angle into [0, pi] while keeping the same rotation.
Eigen::Vector3d normalize_axis_angle(const Eigen::Vector3d& rotvec);

/// Rotation about +Y (the up axis) by `yaw` radians.
Eigen::Matrix3d yaw_matrix(double yaw);

/// Heading of a root orientation: the yaw that maps +Z onto the projection of the
/// rotated body-forward axis. Zero when the forward axis is vertical.
double heading_yaw(const Eigen::Matrix3d& rotation);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double radians);

}  // namespace motok
