#include "motok/scene.hpp"

#include "motok/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace motok::scene {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (q - p)^2 + f[p] over the finite sites of one line.
// `f` is contiguous; `out` is written with `stride`.
void distance_transform_1d(const double* f, double* out, int n, std::ptrdiff_t stride,
                           std::vector<int>& sites, std::vector<double>& bounds) {
  sites.clear();
  bounds.clear();
  for (int q = 0; q < n; ++q) {
    const double fq = f[q];
    if (!std::isfinite(fq)) {
      continue;
    }
    while (!sites.empty()) {
      const int v = sites.back();
      const double fv = f[v];
      const double s = ((fq + double(q) * q) - (fv + double(v) * v)) / (2.0 * (q - v));
      if (s <= bounds.back()) {
        sites.pop_back();
        bounds.pop_back();
      } else {
        break;
      }
    }
    if (sites.empty()) {
      sites.push_back(q);
      bounds.push_back(-kInf);
    } else {
      const int v = sites.back();
      const double fv = f[v];
      bounds.push_back(((fq + double(q) * q) - (fv + double(v) * v)) / (2.0 * (q - v)));
      sites.push_back(q);
    }
  }
  if (sites.empty()) {
    for (int q = 0; q < n; ++q) {
      out[q * stride] = kInf;
    }
    return;
  }
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k + 1 < sites.size() && bounds[k + 1] < q) {
      ++k;
    }
    const double dq = q - sites[k];
    out[q * stride] = dq * dq + f[sites[k]];
  }
}

}  // namespace

SceneVoxelGrid::SceneVoxelGrid(int nx, int ny, int nz, Eigen::Vector3d origin, double cell_size)
    : nx_(nx), ny_(ny), nz_(nz), origin_(std::move(origin)), cell_size_(cell_size) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw InvalidArgument("voxel grid dimensions must be at least 1");
  }
  if (!(cell_size > 0.0) || !std::isfinite(cell_size) || !origin_.allFinite()) {
    throw InvalidArgument("voxel grid needs a positive cell size and finite origin");
  }
  occupancy_.assign(static_cast<std::size_t>(nx) * ny * nz, 0);
}

Eigen::Vector3d SceneVoxelGrid::cell_center(int i, int j, int k) const {
  return origin_ + cell_size_ * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
}

std::size_t SceneVoxelGrid::count_occupied() const {
  return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), 1));
}

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature, int nx,
                                               int ny, int nz) {
  const std::size_t total = static_cast<std::size_t>(nx) * ny * nz;
  if (feature.size() != total) {
    throw InvalidArgument("distance transform mask has the wrong size");
  }
  std::vector<double> grid(total);
  for (std::size_t i = 0; i < total; ++i) {
    grid[i] = feature[i] != 0 ? 0.0 : kInf;
  }
  std::vector<double> line(static_cast<std::size_t>(std::max({nx, ny, nz})));
  std::vector<int> sites;
  std::vector<double> bounds;
  const std::ptrdiff_t sx = 1;
  const std::ptrdiff_t sy = nx;
  const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(nx) * ny;

  auto pass = [&](int n, std::ptrdiff_t stride, int outer_a, std::ptrdiff_t stride_a, int outer_b,
                  std::ptrdiff_t stride_b) {
    for (int b = 0; b < outer_b; ++b) {
      for (int a = 0; a < outer_a; ++a) {
        double* base = grid.data() + a * stride_a + b * stride_b;
        for (int q = 0; q < n; ++q) {
          line[static_cast<std::size_t>(q)] = base[q * stride];
        }
        distance_transform_1d(line.data(), base, n, stride, sites, bounds);
      }
    }
  };
  pass(nx, sx, ny, sy, nz, sz);
  pass(ny, sy, nx, sx, nz, sz);
  pass(nz, sz, nx, sx, ny, sy);
  return grid;
}

SignedDistanceField build_sdf(const SceneVoxelGrid& grid) {
  SignedDistanceField sdf;
  sdf.nx = grid.nx();
  sdf.ny = grid.ny();
  sdf.nz = grid.nz();
  sdf.origin = grid.origin();
  sdf.cell_size = grid.cell_size();

  const auto& occ = grid.occupancy();
  std::vector<std::uint8_t> free_mask(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i) {
    free_mask[i] = occ[i] != 0 ? 0 : 1;
  }
  const auto to_occupied = squared_distance_transform(occ, sdf.nx, sdf.ny, sdf.nz);
  const auto to_free = squared_distance_transform(free_mask, sdf.nx, sdf.ny, sdf.nz);

  sdf.distances.resize(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] != 0) {
      sdf.distances[i] = std::isfinite(to_free[i]) ? -std::sqrt(to_free[i]) * sdf.cell_size
                                                   : -kNoSurfaceDistance;
    } else {
      sdf.distances[i] = std::isfinite(to_occupied[i]) ? std::sqrt(to_occupied[i]) * sdf.cell_size
                                                       : kNoSurfaceDistance;
    }
  }
  return sdf;
}

double sample_sdf(const SignedDistanceField& sdf, const Eigen::Vector3d& point) {
  const Eigen::Vector3d lattice = (point - sdf.origin) / sdf.cell_size - Eigen::Vector3d::Constant(0.5);
  const int dims[3] = {sdf.nx, sdf.ny, sdf.nz};
  Eigen::Vector3d clamped;
  int lo[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    clamped[a] = std::clamp(lattice[a], 0.0, static_cast<double>(dims[a] - 1));
    lo[a] = std::min(static_cast<int>(std::floor(clamped[a])), std::max(dims[a] - 2, 0));
    frac[a] = dims[a] == 1 ? 0.0 : clamped[a] - lo[a];
  }
  auto value = [&](int di, int dj, int dk) {
    const int i = std::min(lo[0] + di, dims[0] - 1);
    const int j = std::min(lo[1] + dj, dims[1] - 1);
    const int k = std::min(lo[2] + dk, dims[2] - 1);
    return sdf.at(i, j, k);
  };
  double result = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const int di = corner & 1;
    const int dj = (corner >> 1) & 1;
    const int dk = (corner >> 2) & 1;
    const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                     (dk ? frac[2] : 1.0 - frac[2]);
    if (w != 0.0) {
      result += w * value(di, dj, dk);
    }
  }
  return result + (lattice - clamped).norm() * sdf.cell_size;
}

CollisionScore collision_score(const KeypointTrack& keypoints, const SignedDistanceField& sdf) {
  if (keypoints.empty()) {
    throw InvalidArgument("collision score needs at least one frame");
  }
  double depth_sum = 0.0;
  std::size_t points = 0;
  std::size_t colliding_frames = 0;
  for (const auto& frame : keypoints) {
    bool inside = false;
    for (Eigen::Index p = 0; p < frame.rows(); ++p) {
      const double d = sample_sdf(sdf, frame.row(p).transpose());
      if (d < 0.0) {
        depth_sum += -d;
        inside = true;
      }
    }
    points += static_cast<std::size_t>(frame.rows());
    colliding_frames += inside ? 1 : 0;
  }
  CollisionScore score;
  score.penetration = points == 0 ? 0.0 : depth_sum / static_cast<double>(points);
  score.colliding_fraction = static_cast<double>(colliding_frames) / keypoints.size();
  return score;
}

double contact_score(const KeypointTrack& keypoints, const KeypointTrack& object_points,
                     double threshold) {
  if (keypoints.size() != object_points.size()) {
    throw InvalidArgument("contact score needs matching frame counts (" +
                          std::to_string(keypoints.size()) + " vs " +
                          std::to_string(object_points.size()) + ")");
  }
  if (keypoints.empty()) {
    throw InvalidArgument("contact score needs at least one frame");
  }
  const double threshold_sq = threshold * threshold;
  std::size_t hits = 0;
  for (std::size_t f = 0; f < keypoints.size(); ++f) {
    double best = kInf;
    for (Eigen::Index a = 0; a < keypoints[f].rows(); ++a) {
      for (Eigen::Index b = 0; b < object_points[f].rows(); ++b) {
        best = std::min(best, (keypoints[f].row(a) - object_points[f].row(b)).squaredNorm());
      }
    }
    hits += best < threshold_sq ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(keypoints.size());
}

double contact_loss(const PointCloud& gt_object, const PointCloud& gt_keypoints,
                    const PointCloud& pred_object, const PointCloud& pred_keypoints) {
  if (gt_object.rows() != pred_object.rows() || gt_keypoints.rows() != pred_keypoints.rows()) {
    throw InvalidArgument("contact loss needs matching point counts");
  }
  if (gt_object.rows() == 0 || gt_keypoints.rows() == 0) {
    throw InvalidArgument("contact loss needs non-empty point sets");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < gt_object.rows(); ++i) {
    for (Eigen::Index j = 0; j < gt_keypoints.rows(); ++j) {
      const double gt = (gt_object.row(i) - gt_keypoints.row(j)).norm();
      const double pred = (pred_object.row(i) - pred_keypoints.row(j)).norm();
      sum += std::abs(gt - pred);
    }
  }
  return sum / static_cast<double>(gt_object.rows() * gt_keypoints.rows());
}

double contact_loss(const KeypointTrack& gt_object, const KeypointTrack& gt_keypoints,
                    const KeypointTrack& pred_object, const KeypointTrack& pred_keypoints) {
  const std::size_t frames = gt_object.size();
  if (frames == 0 || gt_keypoints.size() != frames || pred_object.size() != frames ||
      pred_keypoints.size() != frames) {
    throw InvalidArgument("contact loss needs matching non-empty frame counts");
  }
  double sum = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    sum += contact_loss(gt_object[f], gt_keypoints[f], pred_object[f], pred_keypoints[f]);
  }
  return sum / static_cast<double>(frames);
}

SceneVoxelGrid voxelize_points(const PointCloud& points, double cell_size, int padding_cells) {
  if (points.rows() == 0 || !points.allFinite()) {
    throw InvalidArgument("cannot voxelize an empty or non-finite point cloud");
  }
  if (padding_cells < 1) {
    throw InvalidArgument("voxelization needs at least one cell of padding");
  }
  const Eigen::Vector3d lo = points.colwise().minCoeff().transpose();
  const Eigen::Vector3d hi = points.colwise().maxCoeff().transpose();
  const Eigen::Vector3d origin = lo - Eigen::Vector3d::Constant(padding_cells * cell_size);
  int dims[3];
  for (int a = 0; a < 3; ++a) {
    dims[a] = static_cast<int>(std::floor((hi[a] - lo[a]) / cell_size)) + 1 + 2 * padding_cells;
  }
  SceneVoxelGrid grid(dims[0], dims[1], dims[2], origin, cell_size);
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    int idx[3];
    for (int a = 0; a < 3; ++a) {
      idx[a] = std::clamp(static_cast<int>(std::floor((points(p, a) - origin[a]) / cell_size)), 0,
                          dims[a] - 1);
    }
    grid.set_occupied(idx[0], idx[1], idx[2]);
  }

  // Flood the exterior from the border; whatever free space it cannot reach is interior.
  std::vector<std::uint8_t> outside(grid.num_cells(), 0);
  std::deque<std::array<int, 3>> queue;
  auto visit = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= dims[0] || j >= dims[1] || k >= dims[2]) {
      return;
    }
    const auto li = grid.linear_index(i, j, k);
    if (outside[li] != 0 || grid.occupied(i, j, k)) {
      return;
    }
    outside[li] = 1;
    queue.push_back({i, j, k});
  };
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        if (i == 0 || j == 0 || k == 0 || i == dims[0] - 1 || j == dims[1] - 1 ||
            k == dims[2] - 1) {
          visit(i, j, k);
        }
      }
    }
  }
  while (!queue.empty()) {
    const auto [i, j, k] = queue.front();
    queue.pop_front();
    visit(i + 1, j, k);
    visit(i - 1, j, k);
    visit(i, j + 1, k);
    visit(i, j - 1, k);
    visit(i, j, k + 1);
    visit(i, j, k - 1);
  }
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        if (outside[grid.linear_index(i, j, k)] == 0) {
          grid.set_occupied(i, j, k);
        }
      }
    }
  }
  return grid;
}

}  // namespace motok::scene
