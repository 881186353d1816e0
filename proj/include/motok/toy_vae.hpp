#pragma once

#include "motok/lfq.hpp"
#include "motok/motion.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace motok::vae {

/// Frames folded into one token by three pairwise temporal pooling layers.
inline constexpr int kSegmentFrames = 8;
inline constexpr int kDownsampleLayers = 3;

struct ToyVaeConfig {
  std::uint32_t vocab_size = 8192;
  int hidden_width = 64;
  int downsample_layers = kDownsampleLayers;
  double lambda_recon = 1.0;
  double lambda_commit = 1e-2;
  double lambda_entropy = 1e-4;
  double entropy_temperature = 1.0;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int epochs = 100;
  /// Sequences per gradient step; 0 uses the whole dataset (full-batch descent).
  int batch_size = 0;

  /// Throws InvalidArgument when any field is out of range.
  void validate() const;
};

/// Affine temporal-pooling encoder and its mirrored decoder. Matrices act on column
/// vectors; every layer except the decoder's last applies tanh.
struct ToyVaeParams {
  std::uint32_t vocab_size = 0;
  int hidden_width = 0;

  // Encoder: pairs of frames -> hidden, then two more pairwise poolings, then a
  // projection to log2(K) latent dims.
  Eigen::MatrixXd enc_w1, enc_w2, enc_w3, enc_wz;
  Eigen::VectorXd enc_b1, enc_b2, enc_b3, enc_bz;
  // Decoder: latent -> hidden, then three layers each emitting two time steps.
  Eigen::MatrixXd dec_wp, dec_w1, dec_w2, dec_w3;
  Eigen::VectorXd dec_bp, dec_b1, dec_b2, dec_b3;
  // Per-channel data statistics fixed before training, not learned: the encoder sees
  // (x - input_mean) / input_scale and the decoder output is mapped back the same way.
  Eigen::VectorXd input_mean, input_scale;

  int latent_dims() const;
  std::size_t num_scalars() const;

  /// Flattened view of the learned tensors (normalization excluded), used by the
  /// optimizer and gradient checks.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  void validate() const;
};

/// Per-channel mean and population std over stacked frames; channels with std below
/// 1e-6 keep a unit scale.
void fit_normalization(ToyVaeParams& params, const Eigen::MatrixXd& frames);

/// Random initialization: weights ~ N(0, 1/fan_in), zero biases, identity normalization. Each tensor draws from
/// its own seeded stream, so tensors whose shape does not depend on K are identical
/// across vocabulary sizes for a given seed.
ToyVaeParams init_params(const ToyVaeConfig& config);

/// One latent per 8-frame segment; sequences are padded by repeating the final frame.
std::vector<lfq::LatentVector> encode(const ToyVaeParams& params, const MotionSequence& seq);

/// 8 frames per code.
MotionSequence decode(const ToyVaeParams& params, const std::vector<lfq::QuantizedCode>& codes,
                      int fps = kDefaultFps, bool is_canonical = false);

/// encode, quantize, decode.
MotionSequence reconstruct(const ToyVaeParams& params, const MotionSequence& seq);

/// Token indices of a sequence.
std::vector<std::uint32_t> tokenize(const ToyVaeParams& params, const MotionSequence& seq);

struct LossBreakdown {
  double recon = 0.0;    // mean squared error per element over all padded frames
  double commit = 0.0;   // mean over segments of ||z - bits||^2
  double entropy = 0.0;  // entropy_loss over the batch's latents
  double total = 0.0;
};

/// Frames of a batch as a 75 x (8 S) column-major matrix, one column per padded frame.
Eigen::MatrixXd stack_segments(const std::vector<MotionSequence>& batch);

/// Straight-through offsets (bits - z) frozen at some parameter point. Passing them to
/// loss_and_gradient turns the quantizer into z + constant, which makes the whole loss
/// smooth and lets finite differences reproduce the straight-through gradient.
struct FrozenCodes {
  Eigen::MatrixXd offsets;  // latent_dims x S
  Eigen::MatrixXd bits;     // latent_dims x S
};

FrozenCodes freeze_codes(const ToyVaeParams& params, const Eigen::MatrixXd& frames);

/// Loss of the stacked batch and (optionally) its gradient in flatten() order.
LossBreakdown loss_and_gradient(const ToyVaeParams& params, const ToyVaeConfig& config,
                                const Eigen::MatrixXd& frames, Eigen::VectorXd* gradient,
                                const FrozenCodes* frozen = nullptr);

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;
  double best_total = 0.0;  // running minimum of total up to this epoch
};

struct TrainResult {
  ToyVaeParams params;  // parameters with the lowest full-dataset total loss
  std::vector<EpochRecord> history;
};

/// Plain gradient descent on the weighted sum of reconstruction, commitment and entropy
/// losses with the straight-through estimator. Deterministic for a fixed config.
/// Throws NumericalError on a non-finite loss.
TrainResult train(const ToyVaeConfig& config, const std::vector<MotionSequence>& dataset);

/// CSV text with columns epoch,recon,commit,entropy,total.
std::string loss_history_csv(const std::vector<EpochRecord>& history);

void save_params(const std::filesystem::path& path, const ToyVaeParams& params);
ToyVaeParams load_params(const std::filesystem::path& path);

}  // namespace motok::vae
