#include "motok/error.hpp"
#include "motok/kinematics.hpp"
#include "motok/rotation.hpp"
#include "motok/scene.hpp"
#include "motok/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace motok;
using namespace motok::scene;

namespace {

PointCloud point(double x, double y, double z) {
  PointCloud p(1, 3);
  p << x, y, z;
  return p;
}

SceneVoxelGrid random_grid(int n, double fill, std::uint64_t seed) {
  SceneVoxelGrid g(n, n, n, Eigen::Vector3d(-0.3, 0.1, 0.2), 0.05);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution occupied(fill);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g.set_occupied(i, j, k, occupied(rng));
  return g;
}

}  // namespace

TEST_CASE("grid geometry") {
  const SceneVoxelGrid g(4, 5, 6, Eigen::Vector3d(1, 2, 3), 0.5);
  CHECK(g.num_cells() == 120);
  CHECK(g.cell_center(0, 0, 0).isApprox(Eigen::Vector3d(1.25, 2.25, 3.25)));
  CHECK(g.linear_index(1, 2, 3) == 1 + 4 * (2 + 5 * 3));
  CHECK_THROWS_AS(SceneVoxelGrid(0, 1, 1, Eigen::Vector3d::Zero(), 0.1), InvalidArgument);
  CHECK_THROWS_AS(SceneVoxelGrid(1, 1, 1, Eigen::Vector3d::Zero(), 0.0), InvalidArgument);
}

TEST_CASE("single occupied cell") {
  SceneVoxelGrid g(5, 5, 5, Eigen::Vector3d::Zero(), 0.1);
  g.set_occupied(2, 2, 2);
  const auto sdf = build_sdf(g);
  CHECK(sdf.at(3, 2, 2) == doctest::Approx(0.1));
  CHECK(sdf.at(3, 3, 2) == doctest::Approx(0.1 * std::sqrt(2.0)));
  CHECK(sdf.at(2, 2, 2) == doctest::Approx(-0.1));
}

TEST_CASE("solid block interior") {
  SceneVoxelGrid g(7, 7, 7, Eigen::Vector3d::Zero(), 0.1);
  for (int k = 2; k < 5; ++k)
    for (int j = 2; j < 5; ++j)
      for (int i = 2; i < 5; ++i) g.set_occupied(i, j, k);
  const auto sdf = build_sdf(g);
  const auto expected = oracle::brute_force_sdf(g);
  // Center to center, the nearest free cell is two cells from the block center.
  CHECK(sdf.at(3, 3, 3) == doctest::Approx(-0.2));
  CHECK(sdf.at(3, 3, 3) == expected[g.linear_index(3, 3, 3)]);
}

TEST_CASE("empty and full grids use the sentinel") {
  SceneVoxelGrid g(3, 3, 3, Eigen::Vector3d::Zero(), 0.1);
  auto sdf = build_sdf(g);
  for (double d : sdf.distances) CHECK(d == kNoSurfaceDistance);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) g.set_occupied(i, j, k);
  sdf = build_sdf(g);
  for (double d : sdf.distances) CHECK(d == -kNoSurfaceDistance);
}

TEST_CASE("distance transform agrees exactly with brute force") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto g = random_grid(16, 0.05 + 0.1 * static_cast<double>(seed), seed);
    const auto sdf = build_sdf(g);
    const auto expected = oracle::brute_force_sdf(g);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) mismatches += sdf.distances[i] != expected[i];
    CHECK(mismatches == 0);
  }
}

TEST_CASE("squared distance transform of an anisotropic grid") {
  std::vector<std::uint8_t> feature(4 * 3 * 2, 0);
  feature[0] = 1;
  const auto d = squared_distance_transform(feature, 4, 3, 2);
  CHECK(d[3 + 4 * (2 + 3 * 1)] == 9 + 4 + 1);
  const auto none = squared_distance_transform(std::vector<std::uint8_t>(24, 0), 4, 3, 2);
  CHECK(std::isinf(none[5]));
}

TEST_CASE("voxelized cube matches the analytic box distance") {
  const double cs = 0.05;
  SceneVoxelGrid g(40, 40, 40, Eigen::Vector3d::Constant(-0.5), cs);
  const Eigen::Vector3d lo = Eigen::Vector3d::Zero(), hi = Eigen::Vector3d::Ones();
  for (int k = 0; k < 40; ++k)
    for (int j = 0; j < 40; ++j)
      for (int i = 0; i < 40; ++i) {
        const Eigen::Vector3d c = g.cell_center(i, j, k);
        g.set_occupied(i, j, k, (c.array() > lo.array()).all() && (c.array() < hi.array()).all());
      }
  const auto sdf = build_sdf(g);
  double worst = 0.0;
  for (int k = 0; k < 40; ++k)
    for (int j = 0; j < 40; ++j)
      for (int i = 0; i < 40; ++i)
        worst = std::max(worst, std::abs(sdf.at(i, j, k) - oracle::box_sdf(g.cell_center(i, j, k), lo, hi)));
  CHECK(worst <= cs * std::sqrt(3.0));
}

TEST_CASE("sdf sampling") {
  SceneVoxelGrid g(6, 6, 6, Eigen::Vector3d::Zero(), 0.1);
  g.set_occupied(0, 0, 0);
  const auto sdf = build_sdf(g);
  CHECK(std::abs(sample_sdf(sdf, g.cell_center(3, 2, 1)) - sdf.at(3, 2, 1)) < 1e-12);

  SignedDistanceField line;
  line.nx = 2;
  line.ny = 1;
  line.nz = 1;
  line.cell_size = 1.0;
  line.distances = {0.1, 0.3};
  CHECK(sample_sdf(line, Eigen::Vector3d(1.0, 0.5, 0.5)) == doctest::Approx(0.2));
  // Outside the lattice: the clamped value plus the distance to the clamped point.
  CHECK(sample_sdf(line, Eigen::Vector3d(3.5, 0.5, 0.5)) == doctest::Approx(0.3 + 2.0));
}

TEST_CASE("sampled distance stays within a cell diagonal of the nearest occupied center") {
  const auto g = random_grid(12, 0.03, 5);
  const auto sdf = build_sdf(g);
  std::mt19937_64 rng(6);
  const double cs = g.cell_size();
  for (int n = 0; n < 300; ++n) {
    const Eigen::Vector3d p = g.origin() + Eigen::Vector3d(oracle::uniform(rng, 0.5, 11.5),
                                                           oracle::uniform(rng, 0.5, 11.5),
                                                           oracle::uniform(rng, 0.5, 11.5)) * cs;
    const auto i = static_cast<int>((p - g.origin()).x() / cs);
    const auto j = static_cast<int>((p - g.origin()).y() / cs);
    const auto k = static_cast<int>((p - g.origin()).z() / cs);
    if (g.occupied(i, j, k)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 12; ++c)
      for (int b = 0; b < 12; ++b)
        for (int a = 0; a < 12; ++a)
          if (g.occupied(a, b, c)) best = std::min(best, (g.cell_center(a, b, c) - p).norm());
    CHECK(std::abs(sample_sdf(sdf, p) - best) <= cs * std::sqrt(3.0));
  }
}

TEST_CASE("collision score") {
  SceneVoxelGrid g(10, 10, 10, Eigen::Vector3d::Zero(), 0.1);
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 10; ++i) g.set_occupied(i, j, k);
  const auto sdf = build_sdf(g);

  KeypointTrack track(10, PointCloud(22, 3));
  for (auto& frame : track) frame.rowwise() = Eigen::RowVector3d(0.55, 0.55, 0.95);
  auto score = collision_score(track, sdf);
  CHECK(score.penetration == 0.0);
  CHECK(score.colliding_fraction == 0.0);

  track[3].row(7) << 0.55, 0.55, 0.45;
  REQUIRE(sample_sdf(sdf, Eigen::Vector3d(0.55, 0.55, 0.45)) == doctest::Approx(-0.1));
  score = collision_score(track, sdf);
  CHECK(score.penetration == doctest::Approx(0.1 / (10 * 22)));
  CHECK(score.colliding_fraction == doctest::Approx(0.1));
}

TEST_CASE("contact score threshold is strict") {
  KeypointTrack body(10, point(0, 0, 0));
  KeypointTrack touching(10, point(0, 0, 0));
  CHECK(contact_score(body, touching) == 1.0);
  KeypointTrack far(10, point(0, 1.0, 0));
  CHECK(contact_score(body, far) == 0.0);

  KeypointTrack some = far;
  for (int f : {1, 4, 8}) some[f] = point(0.04, 0, 0);
  CHECK(contact_score(body, some) == doctest::Approx(0.3));

  const KeypointTrack at(10, point(0, 0, 0.05));
  CHECK(contact_score(body, at) == 0.0);
  const KeypointTrack inside(10, point(0, 0, 0.0499));
  CHECK(contact_score(body, inside) == 1.0);
  CHECK_THROWS_AS(contact_score(body, KeypointTrack(3, point(0, 0, 0))), InvalidArgument);
}

TEST_CASE("contact loss") {
  std::mt19937_64 rng(7);
  PointCloud obj(6, 3), kp(22, 3);
  for (auto& v : obj.reshaped()) v = oracle::uniform(rng, -1, 1);
  for (auto& v : kp.reshaped()) v = oracle::uniform(rng, -1, 1);
  CHECK(contact_loss(obj, kp, obj, kp) == 0.0);

  SixDof pose;
  pose.translation = {1.5, -0.3, 2.0};
  pose.orientation = {0.3, 1.2, -0.4};
  const auto obj2 = kinematics::transform_points(obj, pose);
  const auto kp2 = kinematics::transform_points(kp, pose);
  CHECK(std::abs(contact_loss(obj, kp, obj2, kp2)) < 1e-9);

  CHECK(contact_loss(point(0, 0, 0), point(1, 0, 0), point(0, 0, 0), point(0, 1.5, 0)) ==
        doctest::Approx(0.5));

  double expected = 0.0;
  const PointCloud shifted = kp.array() + 0.1;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 22; ++j)
      expected += std::abs((obj.row(i) - kp.row(j)).norm() - (obj.row(i) - shifted.row(j)).norm());
  CHECK(contact_loss(obj, kp, obj, shifted) == doctest::Approx(expected / (6 * 22)).epsilon(1e-12));
}

TEST_CASE("voxelized closed surface is solid") {
  const auto pts = synthetic::box_surface_points(Eigen::Vector3d(0.2, 0.15, 0.2), 6000, 1);
  const auto g = voxelize_points(pts, 0.02);
  const auto sdf = build_sdf(g);
  CHECK(sample_sdf(sdf, Eigen::Vector3d::Zero()) < -0.1);
  CHECK(sample_sdf(sdf, Eigen::Vector3d(0.0, 0.4, 0.0)) > 0.0);
  CHECK_THROWS_AS(voxelize_points(PointCloud(0, 3), 0.02), InvalidArgument);
}

TEST_CASE("rest pose keypoints follow the offset table") {
  FrameMatrix f = FrameMatrix::Zero(1, layout::kFrameWidth);
  f(0, 0) = 0.5;
  f(0, 1) = 0.9;
  f(0, 2) = -1.0;
  const auto joints = kinematics::joint_positions(f, 0);
  REQUIRE(joints.rows() == kinematics::kNumJoints);
  for (int j = 0; j < kinematics::kNumJoints; ++j) {
    Eigen::Vector3d expected(0.5, 0.9, -1.0);
    for (int a = j; a > 0; a = kinematics::kParents[a]) {
      const auto& o = kinematics::kRestOffsets[a];
      expected += Eigen::Vector3d(o[0], o[1], o[2]);
    }
    CHECK((joints.row(j).transpose() - expected).norm() < 1e-12);
  }
}

TEST_CASE("root rotation moves the whole body rigidly") {
  FrameMatrix f = FrameMatrix::Zero(2, layout::kFrameWidth);
  f(1, layout::kRootOrientation + 1) = std::numbers::pi / 3;
  const MotionSequence seq(f, 30, true);
  const auto track = kinematics::body_keypoints(seq);
  const auto r = oracle::rodrigues(0, std::numbers::pi / 3, 0);
  for (int j = 0; j < kinematics::kNumJoints; ++j) {
    const auto expected = oracle::apply(r, {track[0](j, 0), track[0](j, 1), track[0](j, 2)});
    for (int a = 0; a < 3; ++a) CHECK(track[1](j, a) == doctest::Approx(expected[a]).epsilon(1e-12));
  }

  FrameMatrix g = FrameMatrix::Zero(1, layout::kFrameWidth);
  g(0, layout::kObjectTranslation) = 1.0;
  g(0, layout::kObjectOrientation + 1) = std::numbers::pi / 2;
  const auto obj = kinematics::object_points(MotionSequence(g, 30, true), point(1, 0, 0));
  CHECK((obj[0].row(0) - Eigen::RowVector3d(1, 0, -1)).norm() < 1e-12);
}
