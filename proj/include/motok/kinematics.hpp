#pragma once

#include "motok/motion.hpp"
#include "motok/scene.hpp"

#include <array>

namespace motok::kinematics {

inline constexpr int kNumJoints = 22;

/// Parent of each joint in the 22-joint body tree (root has parent -1).
extern const std::array<int, kNumJoints> kParents;

/// Rest-pose offset of each joint from its parent in meters (+Y up, +Z forward, +X to
/// the body's left). Approximates an average adult; stands in for mesh keypoints.
extern const std::array<std::array<double, 3>, kNumJoints> kRestOffsets;

/// World positions of the 22 joints for one frame: the root at the frame's root
/// translation, each child at parent_position + parent_rotation * offset.
scene::PointCloud joint_positions(const FrameMatrix& frames, Eigen::Index frame);

/// joint_positions for every frame.
scene::KeypointTrack body_keypoints(const MotionSequence& seq);

/// Object-frame points mapped through each frame's object 6-DoF.
scene::KeypointTrack object_points(const MotionSequence& seq, const scene::PointCloud& local);

/// Applies a rigid transform to a point cloud.
scene::PointCloud transform_points(const scene::PointCloud& points, const SixDof& pose);

}  // namespace motok::kinematics
