#include "motok/lfq.hpp"

#include "motok/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_map>

namespace motok::lfq {
namespace {

void require_dims(Eigen::Index got, const LfqCodebook& codebook) {
  if (got != codebook.num_dims()) {
    throw InvalidArgument("latent has " + std::to_string(got) + " dims, codebook expects " +
                          std::to_string(codebook.num_dims()));
  }
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Binary entropy of sigmoid(a), computed from the logit to stay accurate when saturated.
double bernoulli_entropy_from_logit(double a) {
  const double p = sigmoid(a);
  return p * softplus(-a) + (1.0 - p) * softplus(a);
}

double bernoulli_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) {
    h -= p * std::log(p);
  }
  if (p < 1.0) {
    h -= (1.0 - p) * std::log1p(-p);
  }
  return h;
}

}  // namespace

LfqCodebook::LfqCodebook(std::uint64_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size < 2 || vocab_size > (std::uint64_t{1} << 31) || !std::has_single_bit(vocab_size)) {
    throw InvalidArgument("vocabulary size must be a power of two in [2, 2^31], got " +
                          std::to_string(vocab_size));
  }
  num_dims_ = std::countr_zero(vocab_size);
}

QuantizedCode quantize(const LatentVector& z, const LfqCodebook& codebook) {
  require_dims(z.size(), codebook);
  QuantizedCode code;
  code.bits.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) {
      throw InvalidArgument("latent contains non-finite values");
    }
    const bool positive = z[i] > 0.0;
    code.bits[i] = positive ? 1.0 : -1.0;
    if (positive) {
      code.index |= std::uint32_t{1} << i;
    }
  }
  return code;
}

QuantizedCode index_to_bits(std::uint32_t index, const LfqCodebook& codebook) {
  if (index >= codebook.vocab_size()) {
    throw InvalidArgument("token index " + std::to_string(index) + " out of range for K=" +
                          std::to_string(codebook.vocab_size()));
  }
  QuantizedCode code;
  code.index = index;
  code.bits.resize(codebook.num_dims());
  for (int i = 0; i < codebook.num_dims(); ++i) {
    code.bits[i] = ((index >> i) & 1U) != 0 ? 1.0 : -1.0;
  }
  return code;
}

double entropy_loss_with_grad(const Eigen::MatrixXd& batch_logits, double temperature,
                              Eigen::MatrixXd& grad) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument("entropy temperature must be positive");
  }
  const Eigen::Index n = batch_logits.rows();
  const Eigen::Index dims = batch_logits.cols();
  if (n < 1) {
    throw InvalidArgument("entropy loss needs a non-empty batch");
  }
  if (!batch_logits.allFinite()) {
    throw InvalidArgument("entropy loss input contains non-finite values");
  }
  const double scale = 2.0 / temperature;
  const Eigen::MatrixXd logits = batch_logits * scale;
  Eigen::MatrixXd probs(n, dims);
  double per_sample = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < dims; ++c) {
      probs(r, c) = sigmoid(logits(r, c));
      per_sample += bernoulli_entropy_from_logit(logits(r, c));
    }
  }
  per_sample /= static_cast<double>(n);

  const Eigen::RowVectorXd marginal = probs.colwise().mean();
  double marginal_entropy = 0.0;
  for (Eigen::Index c = 0; c < dims; ++c) {
    marginal_entropy += bernoulli_entropy(marginal[c]);
  }

  // dH(sigmoid(a))/da = -a p (1 - p); dH(m)/dm = logit(1 - m).
  grad.resize(n, dims);
  constexpr double kEps = 1e-15;
  for (Eigen::Index c = 0; c < dims; ++c) {
    const double m = std::clamp(marginal[c], kEps, 1.0 - kEps);
    const double marginal_slope = std::log((1.0 - m) / m);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double p = probs(r, c);
      const double dp = p * (1.0 - p);
      grad(r, c) = scale * dp * (-logits(r, c) - marginal_slope) / static_cast<double>(n);
    }
  }
  return per_sample - marginal_entropy;
}

double entropy_loss(const Eigen::MatrixXd& batch_logits, double temperature) {
  Eigen::MatrixXd unused;
  return entropy_loss_with_grad(batch_logits, temperature, unused);
}

double commitment_loss(const LatentVector& z, const QuantizedCode& code) {
  if (z.size() != code.bits.size()) {
    throw InvalidArgument("commitment loss dimension mismatch");
  }
  return (z - code.bits).squaredNorm();
}

Utilization codebook_utilization(std::span<const std::uint32_t> indices,
                                 const LfqCodebook& codebook) {
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (auto index : indices) {
    if (index >= codebook.vocab_size()) {
      throw InvalidArgument("token index " + std::to_string(index) + " out of range");
    }
    ++counts[index];
  }
  Utilization out;
  if (indices.empty()) {
    return out;
  }
  const auto k = static_cast<double>(codebook.vocab_size());
  out.fraction = static_cast<double>(counts.size()) / k;
  const auto total = static_cast<double>(indices.size());
  double h = 0.0;
  for (const auto& [index, count] : counts) {
    const double p = static_cast<double>(count) / total;
    h -= p * std::log(p);
  }
  out.entropy = h / std::log(k);
  return out;
}

}  // namespace motok::lfq
