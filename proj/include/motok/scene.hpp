#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace motok::scene {

/// Points as rows, meters.
using PointCloud = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// One keypoint set per frame.
using KeypointTrack = std::vector<PointCloud>;

/// Binary occupancy (1 = occupied). Cell (i, j, k) spans x, y (up), z and has its center
/// at origin + (i + 0.5, j + 0.5, k + 0.5) * cell_size. Storage is x-fastest.
class SceneVoxelGrid {
 public:
  SceneVoxelGrid(int nx, int ny, int nz, Eigen::Vector3d origin, double cell_size);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  const Eigen::Vector3d& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  std::size_t num_cells() const { return occupancy_.size(); }

  std::size_t linear_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_) * k);
  }
  bool occupied(int i, int j, int k) const { return occupancy_[linear_index(i, j, k)] != 0; }
  void set_occupied(int i, int j, int k, bool value = true) {
    occupancy_[linear_index(i, j, k)] = value ? 1 : 0;
  }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  Eigen::Vector3d cell_center(int i, int j, int k) const;
  std::size_t count_occupied() const;

 private:
  int nx_, ny_, nz_;
  Eigen::Vector3d origin_;
  double cell_size_;
  std::vector<std::uint8_t> occupancy_;
};

/// Large finite stand-in for "no surface anywhere" so interpolation stays total.
inline constexpr double kNoSurfaceDistance = 1e9;

/// Signed distances at cell centers, meters: positive in free cells (distance to the
/// nearest occupied center), negative in occupied cells (minus the distance to the
/// nearest free center).
struct SignedDistanceField {
  int nx = 0, ny = 0, nz = 0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double cell_size = 1.0;
  std::vector<double> distances;

  double at(int i, int j, int k) const {
    return distances[static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(nx) *
                         (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k)];
  }
};

/// Squared Euclidean distance transform (in cells) of a binary mask: for every cell, the
/// squared distance to the nearest cell where `feature` is nonzero. Cells with no feature
/// anywhere get +infinity. Separable lower-envelope passes, exact.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature, int nx,
                                               int ny, int nz);

SignedDistanceField build_sdf(const SceneVoxelGrid& grid);

/// Trilinear interpolation over cell centers. Outside the center lattice the query is
/// clamped onto it and the Euclidean distance to the clamped point is added.
double sample_sdf(const SignedDistanceField& sdf, const Eigen::Vector3d& point);

struct CollisionScore {
  double penetration = 0.0;        // mean over frames and points of max(0, -sdf)
  double colliding_fraction = 0.0; // frames with any point strictly inside
};

CollisionScore collision_score(const KeypointTrack& keypoints, const SignedDistanceField& sdf);

inline constexpr double kContactThreshold = 0.05;

/// Fraction of frames whose closest keypoint/object-point pair is strictly closer than
/// `threshold`.
double contact_score(const KeypointTrack& keypoints, const KeypointTrack& object_points,
                     double threshold = kContactThreshold);

/// (1/mn) sum_i sum_j | dist(O_i, J_j) - dist(O^_i, J^_j) | for one frame.
double contact_loss(const PointCloud& gt_object, const PointCloud& gt_keypoints,
                    const PointCloud& pred_object, const PointCloud& pred_keypoints);

/// Frame-averaged contact_loss.
double contact_loss(const KeypointTrack& gt_object, const KeypointTrack& gt_keypoints,
                    const KeypointTrack& pred_object, const KeypointTrack& pred_keypoints);

/// Solid occupancy of a closed surface sample: cells hit by a point are occupied, free
/// cells not reachable from the grid border are filled as interior. The grid is padded
/// by `padding_cells` around the points' bounding box.
SceneVoxelGrid voxelize_points(const PointCloud& points, double cell_size, int padding_cells = 2);

}  // namespace motok::scene
