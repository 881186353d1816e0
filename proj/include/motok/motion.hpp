#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace motok {

/// Column layout of one motion frame.
namespace layout {
inline constexpr int kRootTranslation = 0;
inline constexpr int kRootOrientation = 3;
inline constexpr int kLocalJoints = 6;
inline constexpr int kNumLocalJoints = 21;
inline constexpr int kObjectTranslation = 69;
inline constexpr int kObjectOrientation = 72;
inline constexpr int kFrameWidth = 75;
inline constexpr int kWaypointWidth = 12;
}  // namespace layout

inline constexpr int kDefaultFps = 30;
/// Longest source clip accepted by dataset tooling.
inline constexpr int kMaxSourceFrames = 300;
/// Longest sequence a MotionSequence may hold: the source cap padded up to a whole
/// number of 8-frame token segments.
inline constexpr int kMaxFrames = 304;

using FrameMatrix = Eigen::Matrix<double, Eigen::Dynamic, layout::kFrameWidth, Eigen::RowMajor>;

/// Rigid pose: translation in meters, orientation as an axis-angle vector in radians.
struct SixDof {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d orientation = Eigen::Vector3d::Zero();

  /// Throws InvalidArgument unless finite with |orientation| < 2*pi.
  void validate() const;
};

/// T x 75 motion: root translation, root orientation, 21 local joint rotations, object
/// 6-DoF. Immutable after construction; rotation vectors are wrapped to angles <= pi.
class MotionSequence {
 public:
  MotionSequence(FrameMatrix frames, int fps, bool is_canonical);

  const FrameMatrix& frames() const { return frames_; }
  int num_frames() const { return static_cast<int>(frames_.rows()); }
  int fps() const { return fps_; }
  bool is_canonical() const { return is_canonical_; }

  SixDof root_pose(int frame) const;
  SixDof object_pose(int frame) const;

 private:
  FrameMatrix frames_;
  int fps_;
  bool is_canonical_;
};

/// Sparse root + object 6-DoF samples, one per `spacing_frames` frames.
struct WaypointTrack {
  Eigen::MatrixXd waypoints;  // W x 12: root 6-DoF then object 6-DoF
  int spacing_frames = kDefaultFps;

  int size() const { return static_cast<int>(waypoints.rows()); }
};

/// Places a canonical sequence in the world by applying `root_pose` as a rigid
/// world-from-canonical transform to the root and object tracks. Local joints are
/// untouched. A canonical clip whose first root sits at the origin with identity
/// rotation therefore starts exactly at `root_pose`.
MotionSequence to_global(const MotionSequence& seq, const SixDof& root_pose);

/// Removes the first frame's horizontal position and heading. Height, pitch and roll
/// are preserved.
MotionSequence to_canonical(const MotionSequence& seq);

/// The planar transform that to_canonical removes: translation (x0, 0, z0) and a pure
/// yaw rotation. to_global(to_canonical(s), canonical_root_pose(s)) reproduces s.
SixDof canonical_root_pose(const MotionSequence& seq);

/// Waypoints at frames 0, spacing, 2*spacing, ... giving ceil(T / spacing) rows.
/// `spacing_frames` <= 0 means one waypoint per second (the sequence fps).
WaypointTrack extract_waypoints(const MotionSequence& seq, int spacing_frames = 0);

/// Tiles each waypoint `segment_len` times to align with token segments.
Eigen::MatrixXd repeat_waypoints(const WaypointTrack& track, int segment_len);

/// Pads by repeating the final frame until the length is a multiple of `multiple`.
MotionSequence pad_to_multiple(const MotionSequence& seq, int multiple);

}  // namespace motok
