#include "motok/composition.hpp"

#include "motok/error.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace motok::composition {

lfq::TokenStream mask_tokens(const lfq::TokenStream& tokens, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("mask fraction must lie in [0, 1]");
  }
  if (tokens.vocab_size == 0) {
    throw InvalidArgument("token stream has no vocabulary");
  }
  lfq::TokenStream out = tokens;
  const std::size_t n = tokens.tokens.size();
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pick = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(order[i], order[pick]);
    out.tokens[order[i]] = static_cast<std::uint32_t>(rng() % tokens.vocab_size);
  }
  return out;
}

double cross_entropy_loss(const Eigen::MatrixXd& logits, std::span<const std::uint32_t> targets) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size() || targets.empty()) {
    throw InvalidArgument("cross entropy needs one target per logit row");
  }
  if (!logits.allFinite()) {
    throw InvalidArgument("logits must be finite");
  }
  double sum = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const std::uint32_t target = targets[static_cast<std::size_t>(r)];
    if (target >= logits.cols()) {
      throw InvalidArgument("target " + std::to_string(target) + " outside the vocabulary");
    }
    const double peak = logits.row(r).maxCoeff();
    const double log_norm = peak + std::log((logits.row(r).array() - peak).exp().sum());
    sum += log_norm - logits(r, target);
  }
  return sum / static_cast<double>(logits.rows());
}

double combined_generation_loss(double cross_entropy, double sixdof_loss,
                                const GenerationLossWeights& weights) {
  return weights.lambda_ce * cross_entropy + weights.lambda_sixdof * sixdof_loss;
}

}  // namespace motok::composition
