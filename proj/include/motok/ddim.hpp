#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace motok::ddim {

/// Linear beta schedule and its cumulative signal fraction alpha_bar.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(int num_train_steps = 1000, double beta_start = 1e-4,
                         double beta_end = 2e-2);

  int num_train_steps() const { return static_cast<int>(alpha_bar_.size()); }
  double beta(int step) const;
  double alpha_bar(int step) const;

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bar_;
};

/// Conditioning context. Only `text` is swapped out for the unconditional branch;
/// scene and object context always reach the denoiser.
struct Condition {
  std::optional<Eigen::VectorXd> text;
  Eigen::VectorXd scene;
  Eigen::VectorXd object;
  /// Coarse waypoints from a first pass, empty when unused.
  Eigen::MatrixXd anchor;

  Condition without_text() const;
};

/// Predicts the clean sample w_0 from a noisy w_t at training step t.
using DenoiserFn =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& noisy, int step, const Condition& cond)>;

struct GuidanceConfig {
  double scale = 1.0;
  Condition condition;
};

/// sqrt(alpha_bar_t) w_0 + sqrt(1 - alpha_bar_t) noise.
Eigen::MatrixXd forward_noise(const Eigen::MatrixXd& clean, int step, const NoiseSchedule& schedule,
                              const Eigen::MatrixXd& noise);

/// (1 - s) w_uncond + s w_cond, which equals w_uncond + s (w_cond - w_uncond) and is exact
/// at both s = 0 and s = 1.
Eigen::MatrixXd apply_cfg(const Eigen::MatrixXd& uncond, const Eigen::MatrixXd& cond, double scale);

/// Descending, evenly spaced training steps from T-1 down to 0 (T-1 alone for one step).
std::vector<int> inference_steps(int num_train_steps, int num_infer_steps);

/// Deterministic (eta = 0) DDIM with an x0-predicting denoiser. Guidance is applied to the
/// predicted clean sample; the implied noise is then recovered from it. Returns the clean
/// prediction of the final step. The initial noise is drawn from `seed`.
Eigen::MatrixXd ddim_sample(const DenoiserFn& denoiser, Eigen::Index rows, Eigen::Index cols,
                            const NoiseSchedule& schedule, int num_infer_steps,
                            const GuidanceConfig& guidance, std::uint64_t seed);

/// Same sampler started from a caller-supplied initial noise.
Eigen::MatrixXd ddim_sample_from(const DenoiserFn& denoiser, Eigen::MatrixXd noisy,
                                 const NoiseSchedule& schedule, int num_infer_steps,
                                 const GuidanceConfig& guidance);

/// Two-pass coarse-to-fine sampling: every other row is sampled first, then the full
/// track is sampled with the upsampled coarse track in Condition::anchor.
Eigen::MatrixXd ddim_sample_hierarchical(const DenoiserFn& denoiser, Eigen::Index rows,
                                         Eigen::Index cols, const NoiseSchedule& schedule,
                                         int num_infer_steps, const GuidanceConfig& guidance,
                                         std::uint64_t seed);

/// Standard-normal matrix from a seeded generator.
Eigen::MatrixXd gaussian_noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Mean over elements of |prediction - clean|^2.
double sixdof_denoising_loss(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& clean);

/// Posterior-mean denoiser for data ~ N(mean, sigma^2 I), independent per element.
/// When the condition carries text, `text_mean` replaces `mean`.
DenoiserFn gaussian_posterior_denoiser(const NoiseSchedule& schedule, double mean, double sigma,
                                       std::optional<double> text_mean = std::nullopt);

}  // namespace motok::ddim
