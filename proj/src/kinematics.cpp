#include "motok/kinematics.hpp"

#include "motok/rotation.hpp"

namespace motok::kinematics {

const std::array<int, kNumJoints> kParents = {
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19,
};

const std::array<std::array<double, 3>, kNumJoints> kRestOffsets = {{
    {0.0, 0.0, 0.0},       // pelvis
    {0.06, -0.09, 0.0},    // left hip
    {-0.06, -0.09, 0.0},   // right hip
    {0.0, 0.11, 0.0},      // spine 1
    {0.04, -0.38, 0.0},    // left knee
    {-0.04, -0.38, 0.0},   // right knee
    {0.0, 0.14, 0.0},      // spine 2
    {0.0, -0.40, -0.04},   // left ankle
    {0.0, -0.40, -0.04},   // right ankle
    {0.0, 0.05, 0.02},     // spine 3
    {0.02, -0.06, 0.12},   // left foot
    {-0.02, -0.06, 0.12},  // right foot
    {0.0, 0.21, -0.03},    // neck
    {0.08, 0.12, -0.01},   // left collar
    {-0.08, 0.12, -0.01},  // right collar
    {0.0, 0.09, 0.05},     // head
    {0.12, 0.04, -0.02},   // left shoulder
    {-0.12, 0.04, -0.02},  // right shoulder
    {0.26, 0.0, -0.02},    // left elbow
    {-0.26, 0.0, -0.02},   // right elbow
    {0.25, 0.0, 0.0},      // left wrist
    {-0.25, 0.0, 0.0},     // right wrist
}};

scene::PointCloud joint_positions(const FrameMatrix& frames, Eigen::Index frame) {
  std::array<Eigen::Matrix3d, kNumJoints> global_rot;
  scene::PointCloud positions(kNumJoints, 3);
  for (int j = 0; j < kNumJoints; ++j) {
    const int col = j == 0 ? layout::kRootOrientation : layout::kLocalJoints + 3 * (j - 1);
    const Eigen::Matrix3d local = axis_angle_to_matrix(frames.block<1, 3>(frame, col).transpose());
    if (j == 0) {
      global_rot[0] = local;
      positions.row(0) = frames.block<1, 3>(frame, layout::kRootTranslation);
      continue;
    }
    const int parent = kParents[static_cast<std::size_t>(j)];
    const auto& o = kRestOffsets[static_cast<std::size_t>(j)];
    const Eigen::Vector3d offset(o[0], o[1], o[2]);
    positions.row(j) = positions.row(parent) + (global_rot[static_cast<std::size_t>(parent)] * offset).transpose();
    global_rot[static_cast<std::size_t>(j)] = global_rot[static_cast<std::size_t>(parent)] * local;
  }
  return positions;
}

scene::KeypointTrack body_keypoints(const MotionSequence& seq) {
  scene::KeypointTrack track;
  track.reserve(static_cast<std::size_t>(seq.num_frames()));
  for (Eigen::Index t = 0; t < seq.num_frames(); ++t) {
    track.push_back(joint_positions(seq.frames(), t));
  }
  return track;
}

scene::PointCloud transform_points(const scene::PointCloud& points, const SixDof& pose) {
  const Eigen::Matrix3d r = axis_angle_to_matrix(pose.orientation);
  scene::PointCloud out = points * r.transpose();
  out.rowwise() += pose.translation.transpose();
  return out;
}

scene::KeypointTrack object_points(const MotionSequence& seq, const scene::PointCloud& local) {
  scene::KeypointTrack track;
  track.reserve(static_cast<std::size_t>(seq.num_frames()));
  for (int t = 0; t < seq.num_frames(); ++t) {
    track.push_back(transform_points(local, seq.object_pose(t)));
  }
  return track;
}

}  // namespace motok::kinematics
