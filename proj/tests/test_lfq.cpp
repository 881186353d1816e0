#include "motok/error.hpp"
#include "motok/lfq.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace motok;
using namespace motok::lfq;

TEST_CASE("codebook size must be a power of two") {
  CHECK(LfqCodebook(8192).num_dims() == 13);
  CHECK(LfqCodebook(2).num_dims() == 1);
  CHECK_THROWS_AS(LfqCodebook(0), InvalidArgument);
  CHECK_THROWS_AS(LfqCodebook(1), InvalidArgument);
  CHECK_THROWS_AS(LfqCodebook(100), InvalidArgument);
}

TEST_CASE("quantize examples") {
  const LfqCodebook k8(8);
  const auto code = quantize(Eigen::Vector3d(-0.3, 0.7, 1.2), k8);
  CHECK(code.index == 6);
  CHECK(code.bits == Eigen::Vector3d(-1, 1, 1));

  const LfqCodebook k8192(8192);
  CHECK(quantize(-Eigen::VectorXd::Ones(13), k8192).index == 0);
  CHECK(quantize(Eigen::VectorXd::Constant(13, 0.5), k8192).index == 8191);
  CHECK(quantize(Eigen::VectorXd::Zero(13), k8192).index == 0);
  CHECK_THROWS_AS(quantize(Eigen::VectorXd::Zero(12), k8192), InvalidArgument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(13);
  bad[4] = std::nan("");
  CHECK_THROWS_AS(quantize(bad, k8192), InvalidArgument);
}

TEST_CASE("index_to_bits examples") {
  const LfqCodebook k8(8);
  CHECK(index_to_bits(6, k8).bits == Eigen::Vector3d(-1, 1, 1));
  CHECK(index_to_bits(0, k8).bits == Eigen::Vector3d(-1, -1, -1));
  CHECK_THROWS_AS(index_to_bits(8, k8), InvalidArgument);
}

TEST_CASE("index and bits are a bijection at K=8192") {
  const LfqCodebook k(8192);
  for (std::uint32_t i = 0; i < 8192; ++i) {
    const auto bits = index_to_bits(i, k);
    std::uint32_t expected = 0;
    for (int d = 0; d < 13; ++d) {
      expected += bits.bits[d] > 0 ? (1U << d) : 0U;
    }
    REQUIRE(expected == i);
    REQUIRE(quantize(bits.bits, k).index == i);
  }
}

TEST_CASE("quantizer is idempotent and scale invariant") {
  const LfqCodebook k(8192);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  for (int n = 0; n < 2000; ++n) {
    Eigen::VectorXd z(13);
    for (auto& v : z) v = normal(rng);
    const auto q = quantize(z, k);
    CHECK(quantize(q.bits, k).index == q.index);
    CHECK(quantize(z * oracle::uniform(rng, 1e-3, 1e3), k).index == q.index);
  }
}

TEST_CASE("entropy loss examples") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Random(1, 13);
  CHECK(std::abs(entropy_loss(one)) < 1e-10);

  Eigen::MatrixXd opposite(2, 13);
  opposite.row(0).setConstant(10.0);
  opposite.row(1).setConstant(-10.0);
  CHECK(entropy_loss(opposite) == doctest::Approx(oracle::entropy_loss(opposite, 1.0)).epsilon(1e-9));
  CHECK(entropy_loss(opposite) == doctest::Approx(-13.0 * std::numbers::ln2).epsilon(1e-6));

  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 13, 12.0);
  CHECK(std::abs(entropy_loss(same)) < 1e-8);

  CHECK_THROWS_AS(entropy_loss(one, 0.0), InvalidArgument);
}

TEST_CASE("entropy loss matches the loop oracle and is bounded") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 7;
    const int d = 1 + trial % 13;
    Eigen::MatrixXd z(n, d);
    for (auto& v : z.reshaped()) v = 3.0 * normal(rng);
    const double tau = 0.5 + 0.1 * trial;
    const double loss = entropy_loss(z, tau);
    CHECK(loss == doctest::Approx(oracle::entropy_loss(z, tau)).epsilon(1e-9));
    CHECK(loss >= -d * std::numbers::ln2 - 1e-12);
    CHECK(loss <= d * std::numbers::ln2 + 1e-12);
  }
}

TEST_CASE("entropy gradient matches central differences") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(6, 5);
  for (auto& v : z.reshaped()) v = normal(rng);
  Eigen::MatrixXd grad;
  entropy_loss_with_grad(z, 0.7, grad);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Eigen::MatrixXd plus = z, minus = z;
    plus.reshaped()[i] += h;
    minus.reshaped()[i] -= h;
    const double fd = (entropy_loss(plus, 0.7) - entropy_loss(minus, 0.7)) / (2 * h);
    CHECK(grad.reshaped()[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("commitment loss") {
  const LfqCodebook k2(2);
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(commitment_loss(half, quantize(half, k2)) == doctest::Approx(0.25));

  const LfqCodebook k(8192);
  const auto fixed = index_to_bits(1234, k);
  CHECK(commitment_loss(fixed.bits, fixed) == 0.0);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(13);
  for (auto& v : z) v = normal(rng);
  double expected = 0.0;
  for (int i = 0; i < 13; ++i) {
    const double s = z[i] > 0 ? 1.0 : -1.0;
    expected += (z[i] - s) * (z[i] - s);
  }
  CHECK(commitment_loss(z, quantize(z, k)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("codebook utilization") {
  const LfqCodebook k(64);
  const std::vector<std::uint32_t> same(100, 5);
  auto u = codebook_utilization(same, k);
  CHECK(u.fraction == doctest::Approx(1.0 / 64));
  CHECK(u.entropy == 0.0);

  std::vector<std::uint32_t> each(64);
  for (std::uint32_t i = 0; i < 64; ++i) each[i] = i;
  u = codebook_utilization(each, k);
  CHECK(u.fraction == 1.0);
  CHECK(u.entropy == doctest::Approx(1.0));

  const LfqCodebook big(8192);
  std::mt19937_64 rng(99);
  std::vector<std::uint32_t> draws(8192);
  for (auto& d : draws) d = static_cast<std::uint32_t>(rng() % 8192);
  u = codebook_utilization(draws, big);
  CHECK(std::abs(u.fraction - (1.0 - std::exp(-1.0))) < 0.02);

  const std::vector<std::uint32_t> out_of_range{64};
  CHECK_THROWS_AS(codebook_utilization(out_of_range, k), InvalidArgument);
}
