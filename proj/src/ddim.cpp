#include "motok/ddim.hpp"

#include "motok/error.hpp"

#include <cmath>
#include <random>
#include <string>

namespace motok::ddim {

NoiseSchedule::NoiseSchedule(int num_train_steps, double beta_start, double beta_end) {
  if (num_train_steps < 1) {
    throw InvalidArgument("noise schedule needs at least one step");
  }
  if (!(beta_start > 0.0) || !(beta_end < 1.0) ||
      (num_train_steps > 1 && !(beta_start < beta_end))) {
    throw InvalidArgument("betas must satisfy 0 < beta_start < beta_end < 1");
  }
  betas_.resize(static_cast<std::size_t>(num_train_steps));
  alpha_bar_.resize(betas_.size());
  double running = 1.0;
  for (int i = 0; i < num_train_steps; ++i) {
    const double frac = num_train_steps == 1 ? 0.0 : static_cast<double>(i) / (num_train_steps - 1);
    betas_[static_cast<std::size_t>(i)] = beta_start + (beta_end - beta_start) * frac;
    running *= 1.0 - betas_[static_cast<std::size_t>(i)];
    alpha_bar_[static_cast<std::size_t>(i)] = running;
  }
}

double NoiseSchedule::beta(int step) const {
  if (step < 0 || step >= num_train_steps()) {
    throw InvalidArgument("diffusion step " + std::to_string(step) + " out of range");
  }
  return betas_[static_cast<std::size_t>(step)];
}

double NoiseSchedule::alpha_bar(int step) const {
  if (step < 0 || step >= num_train_steps()) {
    throw InvalidArgument("diffusion step " + std::to_string(step) + " out of range");
  }
  return alpha_bar_[static_cast<std::size_t>(step)];
}

Condition Condition::without_text() const {
  Condition out = *this;
  out.text.reset();
  return out;
}

Eigen::MatrixXd forward_noise(const Eigen::MatrixXd& clean, int step, const NoiseSchedule& schedule,
                              const Eigen::MatrixXd& noise) {
  if (clean.rows() != noise.rows() || clean.cols() != noise.cols()) {
    throw InvalidArgument("noise shape does not match the clean sample");
  }
  const double ab = schedule.alpha_bar(step);
  return std::sqrt(ab) * clean + std::sqrt(1.0 - ab) * noise;
}

Eigen::MatrixXd apply_cfg(const Eigen::MatrixXd& uncond, const Eigen::MatrixXd& cond,
                          double scale) {
  if (uncond.rows() != cond.rows() || uncond.cols() != cond.cols()) {
    throw InvalidArgument("guidance branches have different shapes");
  }
  if (!std::isfinite(scale)) {
    throw InvalidArgument("guidance scale must be finite");
  }
  return (1.0 - scale) * uncond + scale * cond;
}

std::vector<int> inference_steps(int num_train_steps, int num_infer_steps) {
  if (num_infer_steps < 1 || num_infer_steps > num_train_steps) {
    throw InvalidArgument("inference steps must be in [1, num_train_steps]");
  }
  std::vector<int> steps;
  steps.reserve(static_cast<std::size_t>(num_infer_steps));
  if (num_infer_steps == 1) {
    steps.push_back(num_train_steps - 1);
    return steps;
  }
  const double last = num_train_steps - 1;
  for (int i = 0; i < num_infer_steps; ++i) {
    const double frac = static_cast<double>(num_infer_steps - 1 - i) / (num_infer_steps - 1);
    steps.push_back(static_cast<int>(std::lround(last * frac)));
  }
  return steps;
}

Eigen::MatrixXd gaussian_noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = normal(rng);
    }
  }
  return out;
}

Eigen::MatrixXd ddim_sample_from(const DenoiserFn& denoiser, Eigen::MatrixXd noisy,
                                 const NoiseSchedule& schedule, int num_infer_steps,
                                 const GuidanceConfig& guidance) {
  if (!std::isfinite(guidance.scale) || guidance.scale < 0.0) {
    throw InvalidArgument("guidance scale must be finite and non-negative");
  }
  const auto steps = inference_steps(schedule.num_train_steps(), num_infer_steps);
  const Condition uncond = guidance.condition.without_text();
  const bool needs_uncond = guidance.scale != 1.0;

  auto predict = [&](const Eigen::MatrixXd& w, int step, const Condition& cond) {
    Eigen::MatrixXd out = denoiser(w, step, cond);
    if (out.rows() != w.rows() || out.cols() != w.cols()) {
      throw InvalidArgument("denoiser output shape does not match its input");
    }
    return out;
  };

  Eigen::MatrixXd clean;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int step = steps[i];
    const Eigen::MatrixXd cond_pred = predict(noisy, step, guidance.condition);
    clean = needs_uncond ? apply_cfg(predict(noisy, step, uncond), cond_pred, guidance.scale)
                         : cond_pred;
    if (!clean.allFinite()) {
      throw NumericalError("non-finite clean prediction at step " + std::to_string(step));
    }
    if (i + 1 == steps.size()) {
      break;
    }
    const double ab = schedule.alpha_bar(step);
    const double ab_next = schedule.alpha_bar(steps[i + 1]);
    const Eigen::MatrixXd eps = (noisy - std::sqrt(ab) * clean) / std::sqrt(1.0 - ab);
    noisy = std::sqrt(ab_next) * clean + std::sqrt(1.0 - ab_next) * eps;
    if (!noisy.allFinite()) {
      throw NumericalError("non-finite sample at step " + std::to_string(steps[i + 1]));
    }
  }
  return clean;
}

Eigen::MatrixXd ddim_sample(const DenoiserFn& denoiser, Eigen::Index rows, Eigen::Index cols,
                            const NoiseSchedule& schedule, int num_infer_steps,
                            const GuidanceConfig& guidance, std::uint64_t seed) {
  return ddim_sample_from(denoiser, gaussian_noise(rows, cols, seed), schedule, num_infer_steps,
                          guidance);
}

Eigen::MatrixXd ddim_sample_hierarchical(const DenoiserFn& denoiser, Eigen::Index rows,
                                         Eigen::Index cols, const NoiseSchedule& schedule,
                                         int num_infer_steps, const GuidanceConfig& guidance,
                                         std::uint64_t seed) {
  const Eigen::Index coarse_rows = (rows + 1) / 2;
  const Eigen::MatrixXd coarse =
      ddim_sample(denoiser, coarse_rows, cols, schedule, num_infer_steps, guidance, seed);
  Eigen::MatrixXd anchor(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index lo = r / 2;
    if (r % 2 == 0 || lo + 1 >= coarse_rows) {
      anchor.row(r) = coarse.row(lo);
    } else {
      anchor.row(r) = 0.5 * (coarse.row(lo) + coarse.row(lo + 1));
    }
  }
  GuidanceConfig fine = guidance;
  fine.condition.anchor = anchor;
  return ddim_sample(denoiser, rows, cols, schedule, num_infer_steps, fine, seed + 1);
}

double sixdof_denoising_loss(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& clean) {
  if (prediction.rows() != clean.rows() || prediction.cols() != clean.cols() || clean.size() == 0) {
    throw InvalidArgument("6-DoF loss needs matching non-empty shapes");
  }
  return (prediction - clean).squaredNorm() / static_cast<double>(clean.size());
}

DenoiserFn gaussian_posterior_denoiser(const NoiseSchedule& schedule, double mean, double sigma,
                                       std::optional<double> text_mean) {
  return [schedule, mean, sigma, text_mean](const Eigen::MatrixXd& noisy, int step,
                                            const Condition& cond) -> Eigen::MatrixXd {
    const double mu = cond.text.has_value() && text_mean.has_value() ? *text_mean : mean;
    const double ab = schedule.alpha_bar(step);
    const double var = sigma * sigma;
    const double gain = std::sqrt(ab) * var / (ab * var + 1.0 - ab);
    return (mu + gain * (noisy.array() - std::sqrt(ab) * mu)).matrix();
  };
}

}  // namespace motok::ddim
