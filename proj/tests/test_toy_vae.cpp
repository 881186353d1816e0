#include "motok/binary_io.hpp"
#include "motok/error.hpp"
#include "motok/synthetic.hpp"
#include "motok/toy_vae.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace motok;
using namespace motok::vae;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int F = layout::kFrameWidth;

ToyVaeParams random_params(const ToyVaeConfig& config, std::uint64_t seed) {
  ToyVaeParams p = init_params(config);
  std::mt19937_64 rng(seed);
  VectorXd flat = p.flatten();
  for (auto& v : flat) v += oracle::uniform(rng, -0.1, 0.1);
  p.unflatten(flat);
  for (int c = 0; c < F; ++c) {
    p.input_mean[c] = oracle::uniform(rng, -0.5, 0.5);
    p.input_scale[c] = oracle::uniform(rng, 0.5, 2.0);
  }
  return p;
}

std::vector<MotionSequence> random_dataset(int sequences, int frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MotionSequence> out;
  for (int s = 0; s < sequences; ++s) {
    out.emplace_back(oracle::random_frames(frames, rng, 0.5), 30, true);
  }
  return out;
}

VectorXd vstack(const VectorXd& a, const VectorXd& b) {
  VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

// Forward pass of one 8-frame segment written out frame by frame.
MatrixXd oracle_segment(const ToyVaeParams& p, const MatrixXd& frames8) {
  std::vector<VectorXd> x(8);
  for (int t = 0; t < 8; ++t) {
    x[t] = (frames8.col(t) - p.input_mean).cwiseQuotient(p.input_scale);
  }
  auto act = [](const MatrixXd& w, const VectorXd& b, const VectorXd& v) {
    return VectorXd((w * v + b).array().tanh());
  };
  std::vector<VectorXd> h1(4), h2(2);
  for (int i = 0; i < 4; ++i) h1[i] = act(p.enc_w1, p.enc_b1, vstack(x[2 * i], x[2 * i + 1]));
  for (int i = 0; i < 2; ++i) h2[i] = act(p.enc_w2, p.enc_b2, vstack(h1[2 * i], h1[2 * i + 1]));
  const VectorXd h3 = act(p.enc_w3, p.enc_b3, vstack(h2[0], h2[1]));
  const VectorXd z = p.enc_wz * h3 + p.enc_bz;
  VectorXd bits(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) bits[i] = z[i] > 0 ? 1.0 : -1.0;

  const Eigen::Index h = p.hidden_width;
  const VectorXd g0 = act(p.dec_wp, p.dec_bp, bits);
  const VectorXd u1 = act(p.dec_w1, p.dec_b1, g0);
  std::vector<VectorXd> g1{u1.head(h), u1.tail(h)};
  std::vector<VectorXd> g2;
  for (const auto& g : g1) {
    const VectorXd u2 = act(p.dec_w2, p.dec_b2, g);
    g2.push_back(u2.head(h));
    g2.push_back(u2.tail(h));
  }
  MatrixXd out(F, 8);
  for (int i = 0; i < 4; ++i) {
    const VectorXd y = p.dec_w3 * g2[i] + p.dec_b3;
    out.col(2 * i) = p.input_mean + p.input_scale.cwiseProduct(y.head(F));
    out.col(2 * i + 1) = p.input_mean + p.input_scale.cwiseProduct(y.tail(F));
  }
  return out;
}

double relative_error(const VectorXd& a, const VectorXd& b) {
  return (a - b).norm() / std::max(a.norm(), b.norm());
}

}  // namespace

TEST_CASE("config validation") {
  ToyVaeConfig c;
  CHECK_NOTHROW(c.validate());
  c.vocab_size = 100;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.downsample_layers = 2;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.lambda_entropy = 0.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("encode produces one latent per 8 frames") {
  ToyVaeConfig c;
  c.hidden_width = 8;
  c.vocab_size = 64;
  const auto p = init_params(c);
  auto data = random_dataset(1, 8, 1);
  CHECK(encode(p, data[0]).size() == 1);
  data = random_dataset(1, 300, 2);
  const auto z = encode(p, data[0]);
  CHECK(z.size() == 38);
  CHECK(z[0].size() == 6);
  CHECK(reconstruct(p, data[0]).num_frames() == 304);
}

TEST_CASE("zero weights give zero latents and zero frames") {
  ToyVaeConfig c;
  c.hidden_width = 4;
  c.vocab_size = 16;
  ToyVaeParams p = init_params(c);
  p.unflatten(VectorXd::Zero(static_cast<Eigen::Index>(p.num_scalars())));
  const auto data = random_dataset(1, 16, 3);
  for (const auto& z : encode(p, data[0])) {
    CHECK(z.isZero(0.0));
  }
  const lfq::LfqCodebook k(16);
  const auto out = decode(p, {lfq::index_to_bits(3, k)});
  CHECK(out.num_frames() == 8);
  CHECK(out.frames().isZero(0.0));
}

TEST_CASE("forward pass matches the per-frame oracle") {
  ToyVaeConfig c;
  c.hidden_width = 5;
  c.vocab_size = 32;
  const auto p = random_params(c, 4);
  const auto data = random_dataset(2, 20, 5);
  const MatrixXd stacked = stack_segments(data);
  REQUIRE(stacked.cols() == 48);

  MatrixXd expected(F, stacked.cols());
  for (Eigen::Index s = 0; s < stacked.cols() / 8; ++s) {
    expected.middleCols(8 * s, 8) = oracle_segment(p, stacked.middleCols(8 * s, 8));
  }
  const double mse = (expected - stacked).squaredNorm() / static_cast<double>(stacked.size());
  const auto loss = loss_and_gradient(p, c, stacked, nullptr);
  CHECK(std::abs(loss.recon - mse) < 1e-10);

  const auto rec = reconstruct(p, data[0]);
  CHECK((rec.frames().transpose() - expected.leftCols(24)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("frozen codes reproduce the straight-through loss") {
  ToyVaeConfig c;
  c.hidden_width = 4;
  c.vocab_size = 16;
  const auto p = random_params(c, 6);
  const MatrixXd x = stack_segments(random_dataset(2, 16, 7));
  const auto frozen = freeze_codes(p, x);
  VectorXd g_plain, g_frozen;
  const auto a = loss_and_gradient(p, c, x, &g_plain);
  const auto b = loss_and_gradient(p, c, x, &g_frozen, &frozen);
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-13));
  CHECK(relative_error(g_plain, g_frozen) < 1e-12);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(8);
  const std::uint32_t vocab[] = {4, 16, 64, 256, 8192};
  for (int trial = 0; trial < 5; ++trial) {
    ToyVaeConfig c;
    c.hidden_width = 3 + trial;
    c.vocab_size = vocab[trial];
    c.lambda_commit = oracle::uniform(rng, 0.01, 1.0);
    c.lambda_entropy = oracle::uniform(rng, 0.01, 1.0);
    c.entropy_temperature = oracle::uniform(rng, 0.5, 2.0);
    c.seed = static_cast<std::uint64_t>(trial);
    const auto p = random_params(c, 100 + trial);
    const MatrixXd x = stack_segments(random_dataset(1 + trial % 2, 8 + 4 * trial, 200 + trial));
    const auto frozen = freeze_codes(p, x);

    VectorXd analytic;
    loss_and_gradient(p, c, x, &analytic, &frozen);
    const VectorXd flat = p.flatten();
    VectorXd numeric(flat.size());
    ToyVaeParams probe = p;
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      VectorXd shifted = flat;
      shifted[i] = flat[i] + h;
      probe.unflatten(shifted);
      const double up = loss_and_gradient(probe, c, x, nullptr, &frozen).total;
      shifted[i] = flat[i] - h;
      probe.unflatten(shifted);
      const double down = loss_and_gradient(probe, c, x, nullptr, &frozen).total;
      numeric[i] = (up - down) / (2 * h);
    }
    CAPTURE(trial);
    CHECK(relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("constant dataset is learned to low error") {
  FrameMatrix f(16, F);
  for (int c = 0; c < F; ++c) f.col(c).setConstant(0.01 * (c % 7) - 0.02);
  const std::vector<MotionSequence> data{MotionSequence(f, 30, true),
                                         MotionSequence(f, 30, true)};
  ToyVaeConfig c;
  c.hidden_width = 8;
  c.vocab_size = 16;
  c.learning_rate = 0.5;
  c.epochs = 200;
  const auto result = train(c, data);
  REQUIRE(result.history.size() == 200);
  const auto loss = loss_and_gradient(result.params, c, stack_segments(data), nullptr);
  CHECK(loss.recon < 1e-3);
}

TEST_CASE("training is deterministic and the best loss never increases") {
  synthetic::MotionCorpusConfig cc;
  cc.num_sequences = 4;
  cc.frames = 32;
  const auto data = synthetic::motion_corpus(cc);
  ToyVaeConfig c;
  c.hidden_width = 8;
  c.vocab_size = 64;
  c.learning_rate = 0.2;
  c.epochs = 20;
  c.batch_size = 2;
  const auto a = train(c, data);
  const auto b = train(c, data);
  CHECK(a.params.flatten() == b.params.flatten());
  CHECK(loss_history_csv(a.history) == loss_history_csv(b.history));
  for (std::size_t e = 1; e < a.history.size(); ++e) {
    CHECK(a.history[e].best_total <= a.history[e - 1].best_total);
  }
  CHECK(loss_history_csv(a.history).rfind("epoch,recon,commit,entropy,total\n", 0) == 0);
}

TEST_CASE("divergent training raises a numerical error") {
  const auto data = random_dataset(2, 16, 9);
  ToyVaeConfig c;
  c.hidden_width = 4;
  c.vocab_size = 16;
  c.learning_rate = 1e6;
  c.epochs = 50;
  CHECK_THROWS_AS(train(c, data), NumericalError);
}

TEST_CASE("parameter files round trip at float precision") {
  ToyVaeConfig c;
  c.hidden_width = 6;
  c.vocab_size = 128;
  const auto p = random_params(c, 10);
  const auto dir = std::filesystem::temp_directory_path() / "motok_vae_test";
  std::filesystem::create_directories(dir);
  save_params(dir / "a.vae", p);
  const auto q = load_params(dir / "a.vae");
  CHECK(q.vocab_size == 128);
  CHECK(q.hidden_width == 6);
  const VectorXd expected = p.flatten().cast<float>().cast<double>();
  CHECK(q.flatten() == expected);
  CHECK(q.input_scale == p.input_scale.cast<float>().cast<double>());
  save_params(dir / "b.vae", q);
  CHECK(io::read_file(dir / "a.vae") == io::read_file(dir / "b.vae"));

  auto bytes = io::read_file(dir / "a.vae");
  bytes.resize(bytes.size() - 3);
  io::write_file_atomic(dir / "c.vae", bytes);
  CHECK_THROWS_AS(load_params(dir / "c.vae"), FormatError);
  std::filesystem::remove_all(dir);
}
