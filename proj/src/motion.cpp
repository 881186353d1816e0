#include "motok/motion.hpp"

#include "motok/error.hpp"
#include "motok/rotation.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace motok {
namespace {

constexpr int kRotationBlocks[] = {
    layout::kRootOrientation,
    layout::kObjectOrientation,
};

bool is_rotation_column_block(int col) {
  if (col == layout::kRootOrientation || col == layout::kObjectOrientation) {
    return true;
  }
  return col >= layout::kLocalJoints && col < layout::kObjectTranslation &&
         (col - layout::kLocalJoints) % 3 == 0;
}

Eigen::Vector3d block3(const FrameMatrix& frames, int row, int col) {
  return frames.block<1, 3>(row, col).transpose();
}

// Applies p -> R p + t and Q -> R Q to the root and object tracks.
FrameMatrix transform_tracks(const FrameMatrix& frames, const Eigen::Matrix3d& rotation,
                             const Eigen::Vector3d& translation) {
  FrameMatrix out = frames;
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    for (int base : {layout::kRootTranslation, layout::kObjectTranslation}) {
      const Eigen::Vector3d p = block3(frames, static_cast<int>(t), base);
      out.block<1, 3>(t, base) = (rotation * p + translation).transpose();
    }
    for (int base : kRotationBlocks) {
      const Eigen::Matrix3d q = axis_angle_to_matrix(block3(frames, static_cast<int>(t), base));
      out.block<1, 3>(t, base) = matrix_to_axis_angle(rotation * q).transpose();
    }
  }
  return out;
}

}  // namespace

void SixDof::validate() const {
  if (!translation.allFinite() || !orientation.allFinite()) {
    throw InvalidArgument("6-DoF pose has non-finite components");
  }
  if (orientation.norm() >= 2.0 * std::numbers::pi) {
    throw InvalidArgument("6-DoF orientation magnitude must be below 2*pi");
  }
}

MotionSequence::MotionSequence(FrameMatrix frames, int fps, bool is_canonical)
    : frames_(std::move(frames)), fps_(fps), is_canonical_(is_canonical) {
  const auto rows = frames_.rows();
  if (rows < 1 || rows > kMaxFrames) {
    throw InvalidArgument("motion length must be in [1, " + std::to_string(kMaxFrames) +
                          "], got " + std::to_string(rows));
  }
  if (fps_ <= 0) {
    throw InvalidArgument("fps must be positive");
  }
  if (!frames_.allFinite()) {
    throw InvalidArgument("motion frames contain non-finite values");
  }
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (int col = layout::kRootOrientation; col < layout::kFrameWidth; col += 3) {
      if (!is_rotation_column_block(col)) {
        continue;
      }
      const Eigen::Vector3d r = block3(frames_, static_cast<int>(t), col);
      frames_.block<1, 3>(t, col) = normalize_axis_angle(r).transpose();
    }
  }
}

SixDof MotionSequence::root_pose(int frame) const {
  return {block3(frames_, frame, layout::kRootTranslation),
          block3(frames_, frame, layout::kRootOrientation)};
}

SixDof MotionSequence::object_pose(int frame) const {
  return {block3(frames_, frame, layout::kObjectTranslation),
          block3(frames_, frame, layout::kObjectOrientation)};
}

MotionSequence to_global(const MotionSequence& seq, const SixDof& root_pose) {
  if (!seq.is_canonical()) {
    throw InvalidArgument("to_global expects a canonical sequence");
  }
  root_pose.validate();
  const Eigen::Matrix3d rotation = axis_angle_to_matrix(root_pose.orientation);
  return MotionSequence(transform_tracks(seq.frames(), rotation, root_pose.translation),
                        seq.fps(), false);
}

SixDof canonical_root_pose(const MotionSequence& seq) {
  const SixDof first = seq.root_pose(0);
  const double yaw = heading_yaw(axis_angle_to_matrix(first.orientation));
  SixDof pose;
  pose.translation = {first.translation.x(), 0.0, first.translation.z()};
  pose.orientation = {0.0, yaw, 0.0};
  return pose;
}

MotionSequence to_canonical(const MotionSequence& seq) {
  if (seq.is_canonical()) {
    throw InvalidArgument("to_canonical expects a global sequence");
  }
  const SixDof pose = canonical_root_pose(seq);
  const Eigen::Matrix3d inverse_rotation = axis_angle_to_matrix(pose.orientation).transpose();
  const Eigen::Vector3d inverse_translation = -(inverse_rotation * pose.translation);
  return MotionSequence(transform_tracks(seq.frames(), inverse_rotation, inverse_translation),
                        seq.fps(), true);
}

WaypointTrack extract_waypoints(const MotionSequence& seq, int spacing_frames) {
  if (spacing_frames <= 0) {
    spacing_frames = seq.fps();
  }
  const int total = seq.num_frames();
  const int count = (total + spacing_frames - 1) / spacing_frames;
  WaypointTrack track;
  track.spacing_frames = spacing_frames;
  track.waypoints.resize(count, layout::kWaypointWidth);
  for (int i = 0; i < count; ++i) {
    const auto row = seq.frames().row(static_cast<Eigen::Index>(i) * spacing_frames);
    track.waypoints.row(i).head<6>() = row.segment<6>(layout::kRootTranslation);
    track.waypoints.row(i).tail<6>() = row.segment<6>(layout::kObjectTranslation);
  }
  return track;
}

Eigen::MatrixXd repeat_waypoints(const WaypointTrack& track, int segment_len) {
  if (segment_len < 1) {
    throw InvalidArgument("segment length must be at least 1");
  }
  Eigen::MatrixXd out(track.waypoints.rows() * segment_len, track.waypoints.cols());
  for (Eigen::Index i = 0; i < track.waypoints.rows(); ++i) {
    out.middleRows(i * segment_len, segment_len).rowwise() = track.waypoints.row(i);
  }
  return out;
}

MotionSequence pad_to_multiple(const MotionSequence& seq, int multiple) {
  if (multiple < 1) {
    throw InvalidArgument("padding multiple must be at least 1");
  }
  const int total = seq.num_frames();
  const int padded = (total + multiple - 1) / multiple * multiple;
  if (padded == total) {
    return seq;
  }
  FrameMatrix frames(padded, layout::kFrameWidth);
  frames.topRows(total) = seq.frames();
  frames.bottomRows(padded - total).rowwise() = seq.frames().row(total - 1);
  return MotionSequence(std::move(frames), seq.fps(), seq.is_canonical());
}

}  // namespace motok
