#pragma once

#include "motok/motion.hpp"
#include "motok/scene.hpp"

#include <optional>

namespace motok::populate {

struct PopulateConfig {
  /// Minimum clearance (meters) required at the seed cell.
  double footprint_radius = 0.2;
  /// Height above the grid floor (its lowest face) at which clearance is measured.
  double standing_height = 0.9;
  /// Half-width, in cells, of the coarse translation lattice around the seed.
  int search_radius_cells = 8;
  int yaw_samples = 16;
  /// Coordinate-descent rounds; the step halves after each round.
  int refine_rounds = 4;
  /// Penetration (meters) at or below which a placement is feasible.
  double feasibility_threshold = 1e-3;

  void validate() const;
};

/// Planar placement: the world x/z of the canonical root origin and a yaw in [-pi, pi).
struct PlacementOffset {
  Eigen::Vector2d xz_translation = Eigen::Vector2d::Zero();
  double yaw = 0.0;
};

struct PlacementResult {
  PlacementOffset offset;
  double collision = 0.0;           // penetration score of the placed motion
  double colliding_fraction = 0.0;
  bool feasible = false;
  std::size_t candidates_evaluated = 0;
  MotionSequence placed;
};

/// Free cell center at the standing layer with the largest clearance, ties broken by
/// the lowest x index, then the lowest z index. An all-free grid yields its central
/// cell. Throws SceneLessError when no cell offers `footprint_radius` of clearance.
Eigen::Vector3d find_seed_position(const scene::SceneVoxelGrid& grid,
                                   const scene::SignedDistanceField& sdf, double footprint_radius,
                                   double standing_height = 0.9);
Eigen::Vector3d find_seed_position(const scene::SceneVoxelGrid& grid, double footprint_radius,
                                   double standing_height = 0.9);

/// Root pose handed to to_global for a placement: floor height from the grid origin.
SixDof placement_pose(const PlacementOffset& offset, const scene::SceneVoxelGrid& grid);

/// Coarse lattice (cell-sized x/z offsets around the seed times evenly spaced yaws),
/// followed by coordinate-descent refinement that only accepts strict improvements.
/// Candidates whose root origin leaves the grid footprint are skipped. Ties on the
/// lattice go to the candidate closest to the seed, then smallest |yaw|.
/// When `object_local` is given, the object's points join the body keypoints in the
/// penetration average.
PlacementResult optimize_placement(const MotionSequence& seq, const scene::SceneVoxelGrid& grid,
                                   const scene::SignedDistanceField& sdf,
                                   const PopulateConfig& config = {},
                                   const std::optional<scene::PointCloud>& object_local = {});

/// The coarse lattice, in tie-break order, as (xz, yaw) offsets. Exposed for oracles.
std::vector<PlacementOffset> coarse_lattice(const scene::SceneVoxelGrid& grid,
                                            const Eigen::Vector3d& seed,
                                            const PopulateConfig& config);

}  // namespace motok::populate
