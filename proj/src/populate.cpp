#include "motok/populate.hpp"

#include "motok/error.hpp"
#include "motok/kinematics.hpp"
#include "motok/parallel.hpp"
#include "motok/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace motok::populate {
namespace {

int standing_layer(const scene::SceneVoxelGrid& grid, double standing_height) {
  const int layer = static_cast<int>(std::floor(standing_height / grid.cell_size()));
  return std::clamp(layer, 0, grid.ny() - 1);
}

bool inside_footprint(const scene::SceneVoxelGrid& grid, const Eigen::Vector2d& xz) {
  const double x0 = grid.origin().x();
  const double z0 = grid.origin().z();
  return xz.x() >= x0 && xz.x() <= x0 + grid.nx() * grid.cell_size() && xz.y() >= z0 &&
         xz.y() <= z0 + grid.nz() * grid.cell_size();
}

// Canonical-frame points of the motion; a placement is a rigid map of these.
class PlacementScorer {
 public:
  PlacementScorer(const MotionSequence& seq, const scene::SceneVoxelGrid& grid,
                  const scene::SignedDistanceField& sdf,
                  const std::optional<scene::PointCloud>& object_local)
      : grid_(grid), sdf_(sdf), points_(kinematics::body_keypoints(seq)) {
    if (object_local.has_value()) {
      const auto objects = kinematics::object_points(seq, *object_local);
      for (std::size_t t = 0; t < points_.size(); ++t) {
        scene::PointCloud merged(points_[t].rows() + objects[t].rows(), 3);
        merged << points_[t], objects[t];
        points_[t] = std::move(merged);
      }
    }
  }

  scene::CollisionScore score(const PlacementOffset& offset) const {
    const SixDof pose = placement_pose(offset, grid_);
    const Eigen::Matrix3d r = yaw_matrix(offset.yaw);
    scene::KeypointTrack placed;
    placed.reserve(points_.size());
    for (const auto& frame : points_) {
      scene::PointCloud moved = frame * r.transpose();
      moved.rowwise() += pose.translation.transpose();
      placed.push_back(std::move(moved));
    }
    return scene::collision_score(placed, sdf_);
  }

 private:
  const scene::SceneVoxelGrid& grid_;
  const scene::SignedDistanceField& sdf_;
  scene::KeypointTrack points_;
};

}  // namespace

void PopulateConfig::validate() const {
  if (!(footprint_radius >= 0.0) || !std::isfinite(standing_height)) {
    throw InvalidArgument("footprint radius must be non-negative and standing height finite");
  }
  if (search_radius_cells < 0 || yaw_samples < 1) {
    throw InvalidArgument("search radius must be >= 0 and yaw samples >= 1");
  }
  if (refine_rounds < 3) {
    throw InvalidArgument("placement refinement needs at least 3 rounds");
  }
  if (!(feasibility_threshold >= 0.0)) {
    throw InvalidArgument("feasibility threshold must be non-negative");
  }
}

Eigen::Vector3d find_seed_position(const scene::SceneVoxelGrid& grid,
                                   const scene::SignedDistanceField& sdf, double footprint_radius,
                                   double standing_height) {
  const int layer = standing_layer(grid, standing_height);
  if (grid.count_occupied() == 0) {
    return grid.cell_center((grid.nx() - 1) / 2, layer, (grid.nz() - 1) / 2);
  }
  double best = -std::numeric_limits<double>::infinity();
  int best_i = -1;
  int best_k = -1;
  for (int i = 0; i < grid.nx(); ++i) {
    for (int k = 0; k < grid.nz(); ++k) {
      if (grid.occupied(i, layer, k)) {
        continue;
      }
      const double clearance = sdf.at(i, layer, k);
      if (clearance > best) {
        best = clearance;
        best_i = i;
        best_k = k;
      }
    }
  }
  if (best_i < 0 || best < footprint_radius) {
    throw SceneLessError("no free cell with enough clearance; treat the motion as scene-less");
  }
  return grid.cell_center(best_i, layer, best_k);
}

Eigen::Vector3d find_seed_position(const scene::SceneVoxelGrid& grid, double footprint_radius,
                                   double standing_height) {
  return find_seed_position(grid, scene::build_sdf(grid), footprint_radius, standing_height);
}

SixDof placement_pose(const PlacementOffset& offset, const scene::SceneVoxelGrid& grid) {
  SixDof pose;
  pose.translation = {offset.xz_translation.x(), grid.origin().y(), offset.xz_translation.y()};
  pose.orientation = {0.0, offset.yaw, 0.0};
  return pose;
}

std::vector<PlacementOffset> coarse_lattice(const scene::SceneVoxelGrid& grid,
                                            const Eigen::Vector3d& seed,
                                            const PopulateConfig& config) {
  struct Keyed {
    std::tuple<int, double, int, int, int> key;
    PlacementOffset offset;
  };
  std::vector<Keyed> keyed;
  const int radius = config.search_radius_cells;
  const double yaw_step = 2.0 * std::numbers::pi / config.yaw_samples;
  for (int dx = -radius; dx <= radius; ++dx) {
    for (int dz = -radius; dz <= radius; ++dz) {
      const Eigen::Vector2d xz(seed.x() + dx * grid.cell_size(), seed.z() + dz * grid.cell_size());
      if (!inside_footprint(grid, xz)) {
        continue;
      }
      for (int y = 0; y < config.yaw_samples; ++y) {
        const double yaw = -std::numbers::pi + y * yaw_step;
        keyed.push_back({{dx * dx + dz * dz, std::abs(yaw), dx, dz, y}, {xz, yaw}});
      }
    }
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
  std::vector<PlacementOffset> out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) {
    out.push_back(k.offset);
  }
  return out;
}

PlacementResult optimize_placement(const MotionSequence& seq, const scene::SceneVoxelGrid& grid,
                                   const scene::SignedDistanceField& sdf,
                                   const PopulateConfig& config,
                                   const std::optional<scene::PointCloud>& object_local) {
  config.validate();
  if (!seq.is_canonical()) {
    throw InvalidArgument("placement expects a canonical motion");
  }
  const Eigen::Vector3d seed =
      find_seed_position(grid, sdf, config.footprint_radius, config.standing_height);
  const PlacementScorer scorer(seq, grid, sdf, object_local);

  const auto lattice = coarse_lattice(grid, seed, config);
  std::vector<scene::CollisionScore> scores(lattice.size());
  parallel_for(lattice.size(), [&](std::size_t i) { scores[i] = scorer.score(lattice[i]); });

  std::size_t best_index = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].penetration < scores[best_index].penetration) {
      best_index = i;
    }
  }
  PlacementOffset best = lattice[best_index];
  scene::CollisionScore best_score = scores[best_index];
  std::size_t evaluated = lattice.size();

  double steps[3] = {grid.cell_size(), grid.cell_size(), 2.0 * std::numbers::pi / config.yaw_samples};
  for (int round = 0; round < config.refine_rounds; ++round) {
    for (int axis = 0; axis < 3; ++axis) {
      for (double direction : {1.0, -1.0}) {
        PlacementOffset trial = best;
        if (axis < 2) {
          trial.xz_translation[axis] += direction * steps[axis];
          if (!inside_footprint(grid, trial.xz_translation)) {
            continue;
          }
        } else {
          trial.yaw = wrap_angle(trial.yaw + direction * steps[axis]);
        }
        const auto trial_score = scorer.score(trial);
        ++evaluated;
        if (trial_score.penetration < best_score.penetration) {
          best = trial;
          best_score = trial_score;
          break;
        }
      }
    }
    for (double& s : steps) {
      s *= 0.5;
    }
  }

  return PlacementResult{best,
                         best_score.penetration,
                         best_score.colliding_fraction,
                         best_score.penetration <= config.feasibility_threshold,
                         evaluated,
                         to_global(seq, placement_pose(best, grid))};
}

}  // namespace motok::populate
