#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace motok::lfq {

/// Implicit binary codebook {-1,+1}^num_dims. Nothing is stored but the dimension count.
class LfqCodebook {
 public:
  /// Throws InvalidArgument unless `vocab_size` is a power of two in [2, 2^31].
  explicit LfqCodebook(std::uint64_t vocab_size);

  int num_dims() const { return num_dims_; }
  std::uint64_t vocab_size() const { return vocab_size_; }

 private:
  int num_dims_;
  std::uint64_t vocab_size_;
};

using LatentVector = Eigen::VectorXd;

struct QuantizedCode {
  Eigen::VectorXd bits;  // entries exactly +1 or -1
  std::uint32_t index = 0;
};

/// Per-dimension nearest codeword: +1 when z_i > 0, otherwise -1 (zero maps to -1).
/// Bit i (zero-based) contributes 2^i to the index.
QuantizedCode quantize(const LatentVector& z, const LfqCodebook& codebook);

QuantizedCode index_to_bits(std::uint32_t index, const LfqCodebook& codebook);

/// E_n[H(p_n)] - H(mean_n p_n) for factorized Bernoulli codes
/// p_{n,i} = sigmoid(2 z_{n,i} / temperature), entropies in nats summed over dims.
/// Rows of `batch_logits` are samples.
double entropy_loss(const Eigen::MatrixXd& batch_logits, double temperature = 1.0);

/// entropy_loss together with its gradient with respect to `batch_logits`.
double entropy_loss_with_grad(const Eigen::MatrixXd& batch_logits, double temperature,
                              Eigen::MatrixXd& grad);

/// ||z - bits||^2. Only the encoder side receives a gradient, 2 (z - bits).
double commitment_loss(const LatentVector& z, const QuantizedCode& code);

struct Utilization {
  double fraction = 0.0;  // distinct codes / K
  double entropy = 0.0;   // empirical code entropy / ln K
};

Utilization codebook_utilization(std::span<const std::uint32_t> indices,
                                 const LfqCodebook& codebook);

/// Integer token indices in [0, K), each covering `segment_len` motion frames.
struct TokenStream {
  std::uint32_t vocab_size = 0;
  std::uint32_t segment_len = 8;
  std::vector<std::uint32_t> tokens;
};

}  // namespace motok::lfq
