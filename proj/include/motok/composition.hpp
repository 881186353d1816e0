#pragma once

#include "motok/lfq.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>

namespace motok::composition {

/// Replaces exactly round(fraction * N) distinct positions with uniform random tokens in
/// [0, K). A replacement may coincide with the original token.
lfq::TokenStream mask_tokens(const lfq::TokenStream& tokens, double fraction = 0.2,
                             std::uint64_t seed = 0);

/// Mean over rows of -log softmax(logits)[target].
double cross_entropy_loss(const Eigen::MatrixXd& logits, std::span<const std::uint32_t> targets);

// Placeholder weights; no verified values exist.
struct GenerationLossWeights {
  double lambda_ce = 1.0;
  double lambda_sixdof = 1.0;
};

/// lambda_ce * ce + lambda_sixdof * sixdof. Reporting only.
double combined_generation_loss(double cross_entropy, double sixdof_loss,
                                const GenerationLossWeights& weights = {});

}  // namespace motok::composition
