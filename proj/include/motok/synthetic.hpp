#pragma once

#include "motok/motion.hpp"
#include "motok/scene.hpp"

#include <cstdint>
#include <vector>

namespace motok::synthetic {

struct MotionCorpusConfig {
  int num_sequences = 32;
  int frames = 64;
  int fps = kDefaultFps;
  /// Latent sinusoids mixed into the 75 channels.
  int num_factors = 4;
  std::uint64_t seed = 0;
};

/// Canonical sequences whose channels are fixed linear mixtures of a few sinusoids with
/// per-sequence frequency, phase and amplitude, plus a forward walk of the root.
std::vector<MotionSequence> motion_corpus(const MotionCorpusConfig& config);

/// A straight walk along +Z at `speed` m/s, standing pose, canonical.
MotionSequence straight_walk(int frames, double speed, int fps = kDefaultFps);

/// Axis-aligned occupied boxes resting on the floor of an otherwise free grid.
scene::SceneVoxelGrid random_box_scene(int n, double cell_size, int num_boxes,
                                       std::uint64_t seed);

/// Sampled surface of an axis-aligned box centered at the origin.
scene::PointCloud box_surface_points(const Eigen::Vector3d& half_extents, int per_face,
                                     std::uint64_t seed);

}  // namespace motok::synthetic
