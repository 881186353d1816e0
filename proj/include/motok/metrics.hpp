#pragma once

#include "motok/motion.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace motok::metrics {

enum class FeatureKind { motion, text };

/// One feature vector per row.
struct FeatureSet {
  Eigen::MatrixXd features;
  FeatureKind kind = FeatureKind::motion;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
};

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Sample mean and unbiased (N - 1) covariance. Needs at least two rows.
GaussianStats gaussian_stats(const FeatureSet& set);

/// |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), clipped at zero. The cross term
/// is evaluated as tr((S_a^(1/2) S_b S_a^(1/2))^(1/2)), which only needs symmetric
/// eigendecompositions; eigenvalues below 1e-10 are clipped first.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct RPrecision {
  double top1 = 0.0;
  double top2 = 0.0;
  double top3 = 0.0;
};

/// Each motion query ranks its paired text among itself plus pool_size - 1 distinct
/// distractors drawn by a seeded shuffle. The rank is the number of distractors strictly
/// closer than the true text, so ties favor the true pair.
RPrecision r_precision(const FeatureSet& motion, const FeatureSet& text, int pool_size = 32,
                       std::uint64_t seed = 0);

/// Mean Euclidean distance between row i of `motion` and row i of `text`.
double multimodal_distance(const FeatureSet& motion, const FeatureSet& text);

struct Diversity {
  double value = 0.0;
  /// True when N < 2 num_pairs and pairs were drawn with replacement.
  bool with_replacement = false;
};

/// Mean distance over `num_pairs` seeded pairs: disjoint pairs from one permutation when
/// there are enough rows, otherwise independent pairs of distinct rows.
Diversity diversity(const FeatureSet& set, int num_pairs = 300, std::uint64_t seed = 0);

inline constexpr int kHandcraftedFeatureVersion = 1;
inline constexpr int kHandcraftedFeatureDims = 3 * layout::kFrameWidth + 2;

/// Per-channel mean, per-channel population std, per-channel mean |velocity| (units per
/// second), root path length (meters, summed frame-to-frame displacement) and mean root
/// speed (path length over duration, zero for a single frame).
Eigen::VectorXd handcrafted_motion_features(const MotionSequence& seq);

}  // namespace motok::metrics
