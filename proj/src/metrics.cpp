#include "motok/metrics.hpp"

#include "motok/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace motok::metrics {
namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + " contains non-finite values");
  }
}

void require_aligned(const FeatureSet& a, const FeatureSet& b) {
  if (a.size() != b.size() || a.dims() != b.dims()) {
    throw InvalidArgument("paired feature sets must have matching rows and dims");
  }
  if (a.size() == 0) {
    throw InvalidArgument("feature sets are empty");
  }
}

Eigen::MatrixXd clipped_sqrt(const Eigen::MatrixXd& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  const Eigen::VectorXd roots =
      solver.eigenvalues().unaryExpr([](double v) { return v < 1e-10 ? 0.0 : std::sqrt(v); });
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

// Uniform index in [0, n) by rejection, independent of the standard library's
// distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = rng();
  while (draw >= limit) {
    draw = rng();
  }
  return static_cast<std::size_t>(draw % n);
}

}  // namespace

GaussianStats gaussian_stats(const FeatureSet& set) {
  if (set.size() < 2) {
    throw InvalidArgument("gaussian statistics need at least two feature rows");
  }
  require_finite(set.features, "features");
  GaussianStats stats;
  stats.mean = set.features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = set.features.rowwise() - stats.mean.transpose();
  stats.covariance = centered.transpose() * centered / static_cast<double>(set.size() - 1);
  return stats;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const Eigen::Index f = a.mean.size();
  if (b.mean.size() != f || a.covariance.rows() != f || a.covariance.cols() != f ||
      b.covariance.rows() != f || b.covariance.cols() != f) {
    throw InvalidArgument("gaussian statistics have mismatched dimensions");
  }
  require_finite(a.mean, "mean");
  require_finite(b.mean, "mean");
  require_finite(a.covariance, "covariance");
  require_finite(b.covariance, "covariance");

  const Eigen::MatrixXd sa = 0.5 * (a.covariance + a.covariance.transpose());
  const Eigen::MatrixXd sb = 0.5 * (b.covariance + b.covariance.transpose());
  const Eigen::MatrixXd root_a = clipped_sqrt(sa);
  Eigen::MatrixXd inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  const double cross = clipped_sqrt(inner).trace();
  const double value = (a.mean - b.mean).squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross;
  return std::max(0.0, value);
}

RPrecision r_precision(const FeatureSet& motion, const FeatureSet& text, int pool_size,
                       std::uint64_t seed) {
  require_aligned(motion, text);
  if (pool_size < 1 || motion.size() < pool_size) {
    throw InvalidArgument("r-precision needs at least pool_size (" + std::to_string(pool_size) +
                          ") paired rows");
  }
  const auto n = static_cast<std::size_t>(motion.size());
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> others(n - 1);
  std::array<std::size_t, 3> hits{};
  for (std::size_t q = 0; q < n; ++q) {
    // Candidates are every row but q; a partial Fisher-Yates picks the distractors.
    for (std::size_t i = 0, o = 0; i < n; ++i) {
      if (i != q) {
        others[o++] = i;
      }
    }
    const auto query = motion.features.row(static_cast<Eigen::Index>(q));
    const double true_distance = (query - text.features.row(static_cast<Eigen::Index>(q))).norm();
    std::size_t rank = 0;
    for (std::size_t d = 0; d + 1 < static_cast<std::size_t>(pool_size); ++d) {
      const std::size_t pick = d + uniform_index(rng, others.size() - d);
      std::swap(others[d], others[pick]);
      const double distance =
          (query - text.features.row(static_cast<Eigen::Index>(others[d]))).norm();
      if (distance < true_distance) {
        ++rank;
      }
    }
    for (std::size_t k = 0; k < hits.size(); ++k) {
      if (rank <= k) {
        ++hits[k];
      }
    }
  }
  const double total = static_cast<double>(n);
  return {hits[0] / total, hits[1] / total, hits[2] / total};
}

double multimodal_distance(const FeatureSet& motion, const FeatureSet& text) {
  require_aligned(motion, text);
  return (motion.features - text.features).rowwise().norm().mean();
}

Diversity diversity(const FeatureSet& set, int num_pairs, std::uint64_t seed) {
  if (set.size() < 2) {
    throw InvalidArgument("diversity needs at least two feature rows");
  }
  if (num_pairs < 1) {
    throw InvalidArgument("diversity needs at least one pair");
  }
  const auto n = static_cast<std::size_t>(set.size());
  const auto pairs = static_cast<std::size_t>(num_pairs);
  std::mt19937_64 rng(seed);
  Diversity out;
  double sum = 0.0;
  if (n >= 2 * pairs) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < 2 * pairs; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, n - i)]);
    }
    for (std::size_t p = 0; p < pairs; ++p) {
      sum += (set.features.row(static_cast<Eigen::Index>(order[2 * p])) -
              set.features.row(static_cast<Eigen::Index>(order[2 * p + 1])))
                 .norm();
    }
  } else {
    out.with_replacement = true;
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t a = uniform_index(rng, n);
      std::size_t b = uniform_index(rng, n - 1);
      if (b >= a) {
        ++b;
      }
      sum += (set.features.row(static_cast<Eigen::Index>(a)) -
              set.features.row(static_cast<Eigen::Index>(b)))
                 .norm();
    }
  }
  out.value = sum / static_cast<double>(pairs);
  return out;
}

Eigen::VectorXd handcrafted_motion_features(const MotionSequence& seq) {
  constexpr int w = layout::kFrameWidth;
  const FrameMatrix& frames = seq.frames();
  const Eigen::Index t = frames.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(kHandcraftedFeatureDims);

  const Eigen::RowVectorXd mean = frames.colwise().mean();
  out.segment(0, w) = mean.transpose();
  out.segment(w, w) =
      ((frames.rowwise() - mean).array().square().colwise().mean().sqrt()).transpose();
  if (t < 2) {
    return out;
  }
  const FrameMatrix velocity = frames.bottomRows(t - 1) - frames.topRows(t - 1);
  out.segment(2 * w, w) =
      (velocity.array().abs().colwise().mean() * static_cast<double>(seq.fps())).transpose();
  const double path =
      velocity.middleCols<3>(layout::kRootTranslation).rowwise().norm().sum();
  out(3 * w) = path;
  out(3 * w + 1) = path * seq.fps() / static_cast<double>(t - 1);
  return out;
}

}  // namespace motok::metrics
