#include "motok/error.hpp"
#include "motok/kinematics.hpp"
#include "motok/populate.hpp"
#include "motok/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace motok;
using namespace motok::populate;
using scene::SceneVoxelGrid;

namespace {

void fill_box(SceneVoxelGrid& g, int i0, int i1, int j0, int j1, int k0, int k1, bool value = true) {
  for (int k = k0; k < k1; ++k)
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) g.set_occupied(i, j, k, value);
}

// Placement scored through the public motion pipeline, independent of the optimizer.
double placed_penetration(const MotionSequence& seq, const SceneVoxelGrid& g,
                          const scene::SignedDistanceField& sdf, double x, double z, double yaw) {
  SixDof pose;
  pose.translation = {x, g.origin().y(), z};
  pose.orientation = {0.0, yaw, 0.0};
  return scene::collision_score(kinematics::body_keypoints(to_global(seq, pose)), sdf).penetration;
}

double exhaustive_lattice_minimum(const MotionSequence& seq, const SceneVoxelGrid& g,
                                  const scene::SignedDistanceField& sdf,
                                  const Eigen::Vector3d& seed, const PopulateConfig& c,
                                  std::size_t* count = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  const double cs = g.cell_size();
  for (int dx = -c.search_radius_cells; dx <= c.search_radius_cells; ++dx) {
    for (int dz = -c.search_radius_cells; dz <= c.search_radius_cells; ++dz) {
      const double x = seed.x() + dx * cs, z = seed.z() + dz * cs;
      if (x < g.origin().x() || x > g.origin().x() + g.nx() * cs || z < g.origin().z() ||
          z > g.origin().z() + g.nz() * cs) {
        continue;
      }
      for (int y = 0; y < c.yaw_samples; ++y) {
        const double yaw = -std::numbers::pi + 2.0 * std::numbers::pi * y / c.yaw_samples;
        best = std::min(best, placed_penetration(seq, g, sdf, x, z, yaw));
        ++n;
      }
    }
  }
  if (count != nullptr) *count = n;
  return best;
}

}  // namespace

TEST_CASE("seed of an empty room is its central cell") {
  const SceneVoxelGrid g(11, 20, 9, Eigen::Vector3d(1, 0, -2), 0.1);
  const auto seed = find_seed_position(g, 0.2);
  CHECK(seed.isApprox(g.cell_center(5, 9, 4)));
}

TEST_CASE("fully occupied room is scene-less") {
  SceneVoxelGrid g(6, 12, 6, Eigen::Vector3d::Zero(), 0.1);
  fill_box(g, 0, 6, 0, 12, 0, 6);
  CHECK_THROWS_AS(find_seed_position(g, 0.2), SceneLessError);
  const auto walk = synthetic::straight_walk(30, 0.5);
  CHECK_THROWS_AS(optimize_placement(walk, g, scene::build_sdf(g)), SceneLessError);
}

TEST_CASE("seed in an L-shaped free region matches an exhaustive scan") {
  SceneVoxelGrid g(30, 12, 30, Eigen::Vector3d::Zero(), 0.1);
  fill_box(g, 0, 30, 0, 12, 0, 30);
  fill_box(g, 2, 10, 0, 12, 2, 28, false);
  fill_box(g, 2, 28, 0, 12, 2, 10, false);
  const auto sdf = oracle::brute_force_sdf(g);
  double best = -1.0;
  int bi = -1, bk = -1;
  for (int i = 0; i < 30; ++i)
    for (int k = 0; k < 30; ++k) {
      const double d = sdf[g.linear_index(i, 9, k)];
      if (!g.occupied(i, 9, k) && d > best) {
        best = d;
        bi = i;
        bk = k;
      }
    }
  CHECK(find_seed_position(g, 0.2).isApprox(g.cell_center(bi, 9, bk)));
  CHECK(bi >= 2);
  CHECK(bi < 10);
  CHECK(bk < 10);
}

TEST_CASE("seed with too little clearance is scene-less") {
  SceneVoxelGrid g(10, 12, 10, Eigen::Vector3d::Zero(), 0.1);
  fill_box(g, 0, 10, 0, 12, 0, 10);
  g.set_occupied(5, 9, 5, false);
  CHECK_THROWS_AS(find_seed_position(g, 0.2), SceneLessError);
  CHECK_NOTHROW(find_seed_position(g, 0.1));
}

TEST_CASE("lattice enumeration and order") {
  const SceneVoxelGrid g(20, 12, 20, Eigen::Vector3d::Zero(), 0.1);
  PopulateConfig c;
  c.search_radius_cells = 2;
  c.yaw_samples = 4;
  const Eigen::Vector3d seed = g.cell_center(0, 9, 10);
  const auto lattice = coarse_lattice(g, seed, c);
  // Negative x offsets leave the footprint.
  CHECK(lattice.size() == 3 * 5 * 4);
  CHECK(lattice.front().xz_translation.isApprox(Eigen::Vector2d(seed.x(), seed.z())));
  CHECK(lattice.front().yaw == 0.0);
  for (std::size_t i = 1; i < lattice.size(); ++i) {
    const auto r = [&](const PlacementOffset& o) {
      return (o.xz_translation - Eigen::Vector2d(seed.x(), seed.z())).squaredNorm();
    };
    CHECK(r(lattice[i]) >= r(lattice[i - 1]) - 1e-12);
  }
}

TEST_CASE("null scene places at the seed without collision") {
  const SceneVoxelGrid g(40, 25, 40, Eigen::Vector3d(-2, 0, -2), 0.1);
  const auto sdf = scene::build_sdf(g);
  const auto walk = synthetic::straight_walk(60, 0.8);
  const auto result = optimize_placement(walk, g, sdf);
  const auto seed = find_seed_position(g, 0.2);
  CHECK(result.collision == 0.0);
  CHECK(result.feasible);
  CHECK(result.offset.xz_translation.isApprox(Eigen::Vector2d(seed.x(), seed.z())));
  CHECK(result.offset.yaw == 0.0);
  CHECK_FALSE(result.placed.is_canonical());
  CHECK(result.placed.root_pose(0).translation.isApprox(Eigen::Vector3d(seed.x(), 0.93, seed.z())));
}

TEST_CASE("corridor admits only the aligned heading") {
  SceneVoxelGrid g(40, 25, 60, Eigen::Vector3d::Zero(), 0.1);
  fill_box(g, 0, 11, 0, 25, 0, 60);
  fill_box(g, 29, 40, 0, 25, 0, 60);
  fill_box(g, 0, 40, 0, 25, 0, 2);
  fill_box(g, 0, 40, 0, 25, 58, 60);
  const auto sdf = scene::build_sdf(g);
  const auto walk = synthetic::straight_walk(90, 0.8);
  PopulateConfig c;
  const auto result = optimize_placement(walk, g, sdf, c);
  const auto seed = find_seed_position(g, sdf, c.footprint_radius);
  std::size_t count = 0;
  const double oracle_min = exhaustive_lattice_minimum(walk, g, sdf, seed, c, &count);
  CHECK(count == coarse_lattice(g, seed, c).size());
  CHECK(result.collision <= oracle_min + 1e-12);
  CHECK(result.collision == 0.0);
  CHECK(std::abs(result.offset.yaw) < 2.0 * std::numbers::pi / c.yaw_samples);
  CHECK(placed_penetration(walk, g, sdf, seed.x(), seed.z(), std::numbers::pi / 2) > 0.0);
  CHECK(result.candidates_evaluated >= count);
}

TEST_CASE("room narrower than the body is infeasible") {
  SceneVoxelGrid g(16, 25, 16, Eigen::Vector3d::Zero(), 0.1);
  fill_box(g, 0, 16, 0, 25, 0, 16);
  fill_box(g, 5, 11, 0, 25, 5, 11, false);
  const auto walk = synthetic::straight_walk(60, 0.8);
  const auto result = optimize_placement(walk, g, scene::build_sdf(g));
  CHECK_FALSE(result.feasible);
  CHECK(result.collision > PopulateConfig{}.feasibility_threshold);
}

TEST_CASE("placement is deterministic and the object joins the score") {
  const auto g = synthetic::random_box_scene(32, 0.1, 5, 3);
  const auto sdf = scene::build_sdf(g);
  auto walk = synthetic::straight_walk(45, 0.6);
  const auto a = optimize_placement(walk, g, sdf);
  const auto b = optimize_placement(walk, g, sdf);
  CHECK(a.offset.xz_translation == b.offset.xz_translation);
  CHECK(a.offset.yaw == b.offset.yaw);
  CHECK(a.collision == b.collision);

  const auto box = synthetic::box_surface_points(Eigen::Vector3d(0.2, 0.2, 0.2), 20, 0);
  const auto with_object = optimize_placement(walk, g, sdf, {}, box);
  CHECK(with_object.collision >= 0.0);
  CHECK_THROWS_AS(optimize_placement(to_global(walk, SixDof{}), g, sdf), InvalidArgument);
  PopulateConfig bad;
  bad.refine_rounds = 2;
  CHECK_THROWS_AS(optimize_placement(walk, g, sdf, bad), InvalidArgument);
}
