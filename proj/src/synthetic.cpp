#include "motok/synthetic.hpp"

#include "motok/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace motok::synthetic {
namespace {

// Uniform double in [lo, hi) from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace

std::vector<MotionSequence> motion_corpus(const MotionCorpusConfig& c) {
  if (c.num_sequences < 1 || c.frames < 1 || c.frames > kMaxSourceFrames || c.fps < 1 ||
      c.num_factors < 1) {
    throw InvalidArgument("invalid synthetic corpus configuration");
  }
  constexpr int w = layout::kFrameWidth;
  std::mt19937_64 rng(c.seed);

  // Shared across the corpus: the mixing matrix and channel offsets.
  Eigen::MatrixXd mixing(w, c.num_factors);
  Eigen::VectorXd offset(w);
  for (int ch = 0; ch < w; ++ch) {
    for (int f = 0; f < c.num_factors; ++f) {
      mixing(ch, f) = uniform(rng, -0.15, 0.15);
    }
    offset(ch) = uniform(rng, -0.2, 0.2);
  }
  offset(layout::kRootTranslation + 1) = 0.93;

  std::vector<MotionSequence> corpus;
  corpus.reserve(static_cast<std::size_t>(c.num_sequences));
  for (int s = 0; s < c.num_sequences; ++s) {
    Eigen::VectorXd freq(c.num_factors), phase(c.num_factors), amp(c.num_factors);
    for (int f = 0; f < c.num_factors; ++f) {
      freq(f) = uniform(rng, 0.3, 1.2);
      phase(f) = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      amp(f) = uniform(rng, 0.5, 1.5);
    }
    const double speed = uniform(rng, 0.0, 1.0);
    FrameMatrix frames(c.frames, w);
    for (int t = 0; t < c.frames; ++t) {
      const double seconds = static_cast<double>(t) / c.fps;
      Eigen::VectorXd factors(c.num_factors);
      for (int f = 0; f < c.num_factors; ++f) {
        factors(f) = amp(f) * std::sin(2.0 * std::numbers::pi * freq(f) * seconds + phase(f));
      }
      frames.row(t) = (offset + mixing * factors).transpose();
      frames(t, layout::kRootTranslation + 2) += speed * seconds;
    }
    corpus.push_back(to_canonical(MotionSequence(std::move(frames), c.fps, false)));
  }
  return corpus;
}

MotionSequence straight_walk(int frames, double speed, int fps) {
  FrameMatrix f = FrameMatrix::Zero(frames, layout::kFrameWidth);
  for (int t = 0; t < frames; ++t) {
    f(t, layout::kRootTranslation + 1) = 0.93;
    f(t, layout::kRootTranslation + 2) = speed * t / static_cast<double>(fps);
  }
  return MotionSequence(std::move(f), fps, true);
}

scene::SceneVoxelGrid random_box_scene(int n, double cell_size, int num_boxes,
                                       std::uint64_t seed) {
  if (n < 4 || num_boxes < 0) {
    throw InvalidArgument("random scenes need n >= 4 and a non-negative box count");
  }
  scene::SceneVoxelGrid grid(n, n, n, Eigen::Vector3d::Zero(), cell_size);
  std::mt19937_64 rng(seed);
  for (int b = 0; b < num_boxes; ++b) {
    const int sx = uniform_int(rng, 1, n / 4);
    const int sz = uniform_int(rng, 1, n / 4);
    const int sy = uniform_int(rng, 1, n / 2);
    const int x0 = uniform_int(rng, 0, n - sx);
    const int z0 = uniform_int(rng, 0, n - sz);
    for (int k = z0; k < z0 + sz; ++k) {
      for (int j = 0; j < sy; ++j) {
        for (int i = x0; i < x0 + sx; ++i) {
          grid.set_occupied(i, j, k);
        }
      }
    }
  }
  return grid;
}

scene::PointCloud box_surface_points(const Eigen::Vector3d& half_extents, int per_face,
                                     std::uint64_t seed) {
  if (per_face < 1 || !(half_extents.array() > 0.0).all()) {
    throw InvalidArgument("box surface sampling needs positive extents and samples");
  }
  std::mt19937_64 rng(seed);
  scene::PointCloud points(6 * per_face, 3);
  Eigen::Index row = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-1.0, 1.0}) {
      for (int p = 0; p < per_face; ++p, ++row) {
        for (int a = 0; a < 3; ++a) {
          points(row, a) = a == axis ? side * half_extents[a]
                                     : uniform(rng, -half_extents[a], half_extents[a]);
        }
      }
    }
  }
  return points;
}

}  // namespace motok::synthetic
