#include "motok/toy_vae.hpp"

#include "motok/binary_io.hpp"
#include "motok/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>

namespace motok::vae {
namespace {

constexpr int kFrameWidth = layout::kFrameWidth;
constexpr std::uint32_t kParamsVersion = 1;
// 16 learned tensors followed by the two normalization vectors.
constexpr std::uint32_t kNumTensors = 18;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Column-major reshape without copying the underlying order.
MatrixXd reshaped(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const MatrixXd>(m.data(), rows, cols);
}

MatrixXd tanh_of(const MatrixXd& m) { return m.array().tanh().matrix(); }

// d/dx tanh(x) expressed through the activation value.
MatrixXd tanh_backward(const MatrixXd& upstream, const MatrixXd& activation) {
  return (upstream.array() * (1.0 - activation.array().square())).matrix();
}

MatrixXd affine(const MatrixXd& w, const VectorXd& b, const MatrixXd& x) {
  return (w * x).colwise() + b;
}

struct Activations {
  MatrixXd x1;           // 2F x 4S paired frames
  MatrixXd h1, h2, h3;   // h x 4S, h x 2S, h x S
  MatrixXd z;            // d x S
  MatrixXd bits;         // d x S
  MatrixXd zbar;         // decoder input
  MatrixXd g0, g1, g2;   // h x S, h x 2S, h x 4S
  MatrixXd xhat;         // F x 8S
};

MatrixXd sign_bits(const MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
}

Activations run_encoder(const ToyVaeParams& p, const MatrixXd& frames) {
  const Eigen::Index segments = frames.cols() / kSegmentFrames;
  const Eigen::Index h = p.hidden_width;
  Activations a;
  const MatrixXd normalized =
      ((frames.colwise() - p.input_mean).array().colwise() / p.input_scale.array()).matrix();
  a.x1 = reshaped(normalized, 2 * kFrameWidth, 4 * segments);
  a.h1 = tanh_of(affine(p.enc_w1, p.enc_b1, a.x1));
  a.h2 = tanh_of(affine(p.enc_w2, p.enc_b2, reshaped(a.h1, 2 * h, 2 * segments)));
  a.h3 = tanh_of(affine(p.enc_w3, p.enc_b3, reshaped(a.h2, 2 * h, segments)));
  a.z = affine(p.enc_wz, p.enc_bz, a.h3);
  return a;
}

void run_decoder(const ToyVaeParams& p, Activations& a) {
  const Eigen::Index segments = a.zbar.cols();
  const Eigen::Index h = p.hidden_width;
  a.g0 = tanh_of(affine(p.dec_wp, p.dec_bp, a.zbar));
  a.g1 = tanh_of(reshaped(affine(p.dec_w1, p.dec_b1, a.g0), h, 2 * segments));
  a.g2 = tanh_of(reshaped(affine(p.dec_w2, p.dec_b2, a.g1), h, 4 * segments));
  const MatrixXd y = reshaped(affine(p.dec_w3, p.dec_b3, a.g2), kFrameWidth, 8 * segments);
  a.xhat = ((y.array().colwise() * p.input_scale.array()).colwise() +
            p.input_mean.array()).matrix();
}

MatrixXd decode_matrix(const ToyVaeParams& p, const MatrixXd& code_bits) {
  Activations a;
  a.zbar = code_bits;
  run_decoder(p, a);
  return a.xhat;
}

template <typename Fn>
void for_each_tensor(ToyVaeParams& p, Fn&& fn) {
  fn(p.enc_w1); fn(p.enc_b1); fn(p.enc_w2); fn(p.enc_b2);
  fn(p.enc_w3); fn(p.enc_b3); fn(p.enc_wz); fn(p.enc_bz);
  fn(p.dec_wp); fn(p.dec_bp); fn(p.dec_w1); fn(p.dec_b1);
  fn(p.dec_w2); fn(p.dec_b2); fn(p.dec_w3); fn(p.dec_b3);
}

template <typename Fn>
void for_each_tensor(const ToyVaeParams& p, Fn&& fn) {
  for_each_tensor(const_cast<ToyVaeParams&>(p), [&](auto& t) { fn(std::as_const(t)); });
}

}  // namespace

void ToyVaeConfig::validate() const {
  lfq::LfqCodebook codebook(vocab_size);
  if (downsample_layers != kDownsampleLayers) {
    throw InvalidArgument("toy VAE supports exactly 3 downsample layers (factor 8)");
  }
  if (hidden_width < 1) {
    throw InvalidArgument("hidden width must be positive");
  }
  if (!(lambda_recon > 0.0) || !(lambda_commit > 0.0) || !(lambda_entropy >= 0.0)) {
    throw InvalidArgument("loss weights must be positive (lambda_entropy may be 0 for ablations)");
  }
  if (!(entropy_temperature > 0.0)) {
    throw InvalidArgument("entropy temperature must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be positive");
  }
  if (epochs < 1) {
    throw InvalidArgument("epochs must be at least 1");
  }
  if (batch_size < 0) {
    throw InvalidArgument("batch size must be non-negative");
  }
}

int ToyVaeParams::latent_dims() const { return static_cast<int>(enc_wz.rows()); }

std::size_t ToyVaeParams::num_scalars() const {
  std::size_t total = 0;
  for_each_tensor(*this, [&](const auto& t) { total += static_cast<std::size_t>(t.size()); });
  return total;
}

VectorXd ToyVaeParams::flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(num_scalars()));
  Eigen::Index offset = 0;
  for_each_tensor(*this, [&](const auto& t) {
    flat.segment(offset, t.size()) = Eigen::Map<const VectorXd>(t.data(), t.size());
    offset += t.size();
  });
  return flat;
}

void ToyVaeParams::unflatten(const VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_scalars()) {
    throw InvalidArgument("flat parameter vector has the wrong length");
  }
  Eigen::Index offset = 0;
  for_each_tensor(*this, [&](auto& t) {
    Eigen::Map<VectorXd>(t.data(), t.size()) = flat.segment(offset, t.size());
    offset += t.size();
  });
}

void ToyVaeParams::validate() const {
  const lfq::LfqCodebook codebook(vocab_size);
  const Eigen::Index h = hidden_width;
  const Eigen::Index d = codebook.num_dims();
  const Eigen::Index f = kFrameWidth;
  auto check = [](const auto& t, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (t.rows() != rows || t.cols() != cols) {
      throw InvalidArgument(std::string("toy VAE tensor ") + name + " has shape " +
                            std::to_string(t.rows()) + "x" + std::to_string(t.cols()) +
                            ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!t.allFinite()) {
      throw InvalidArgument(std::string("toy VAE tensor ") + name + " is not finite");
    }
  };
  check(enc_w1, h, 2 * f, "enc_w1");
  check(enc_b1, h, 1, "enc_b1");
  check(enc_w2, h, 2 * h, "enc_w2");
  check(enc_b2, h, 1, "enc_b2");
  check(enc_w3, h, 2 * h, "enc_w3");
  check(enc_b3, h, 1, "enc_b3");
  check(enc_wz, d, h, "enc_wz");
  check(enc_bz, d, 1, "enc_bz");
  check(dec_wp, h, d, "dec_wp");
  check(dec_bp, h, 1, "dec_bp");
  check(dec_w1, 2 * h, h, "dec_w1");
  check(dec_b1, 2 * h, 1, "dec_b1");
  check(dec_w2, 2 * h, h, "dec_w2");
  check(dec_b2, 2 * h, 1, "dec_b2");
  check(dec_w3, 2 * f, h, "dec_w3");
  check(dec_b3, 2 * f, 1, "dec_b3");
  check(input_mean, f, 1, "input_mean");
  check(input_scale, f, 1, "input_scale");
  if (!(input_scale.array() > 0.0).all()) {
    throw InvalidArgument("toy VAE input scale must be positive");
  }
}

void fit_normalization(ToyVaeParams& params, const MatrixXd& frames) {
  if (frames.rows() != kFrameWidth || frames.cols() == 0) {
    throw InvalidArgument("normalization needs 75 x N stacked frames");
  }
  params.input_mean = frames.rowwise().mean();
  params.input_scale = ((frames.colwise() - params.input_mean).array().square().rowwise().mean())
                           .sqrt()
                           .unaryExpr([](double v) { return v < 1e-6 ? 1.0 : v; })
                           .matrix();
}

ToyVaeParams init_params(const ToyVaeConfig& config) {
  config.validate();
  const lfq::LfqCodebook codebook(config.vocab_size);
  const Eigen::Index h = config.hidden_width;
  const Eigen::Index d = codebook.num_dims();
  const Eigen::Index f = kFrameWidth;

  ToyVaeParams p;
  p.vocab_size = config.vocab_size;
  p.hidden_width = config.hidden_width;
  std::uint64_t stream = 0;
  auto weights = [&](Eigen::Index rows, Eigen::Index cols) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(stream++)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
    MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        w(r, c) = normal(rng);
      }
    }
    return w;
  };
  p.enc_w1 = weights(h, 2 * f);
  p.enc_w2 = weights(h, 2 * h);
  p.enc_w3 = weights(h, 2 * h);
  p.enc_wz = weights(d, h);
  p.dec_wp = weights(h, d);
  p.dec_w1 = weights(2 * h, h);
  p.dec_w2 = weights(2 * h, h);
  p.dec_w3 = weights(2 * f, h);
  p.enc_b1 = VectorXd::Zero(h);
  p.enc_b2 = VectorXd::Zero(h);
  p.enc_b3 = VectorXd::Zero(h);
  p.enc_bz = VectorXd::Zero(d);
  p.dec_bp = VectorXd::Zero(h);
  p.dec_b1 = VectorXd::Zero(2 * h);
  p.dec_b2 = VectorXd::Zero(2 * h);
  p.dec_b3 = VectorXd::Zero(2 * f);
  p.input_mean = VectorXd::Zero(f);
  p.input_scale = VectorXd::Ones(f);
  return p;
}

MatrixXd stack_segments(const std::vector<MotionSequence>& batch) {
  Eigen::Index columns = 0;
  std::vector<MotionSequence> padded;
  padded.reserve(batch.size());
  for (const auto& seq : batch) {
    padded.push_back(pad_to_multiple(seq, kSegmentFrames));
    columns += padded.back().num_frames();
  }
  MatrixXd frames(kFrameWidth, columns);
  Eigen::Index col = 0;
  for (const auto& seq : padded) {
    frames.middleCols(col, seq.num_frames()) = seq.frames().transpose();
    col += seq.num_frames();
  }
  return frames;
}

std::vector<lfq::LatentVector> encode(const ToyVaeParams& params, const MotionSequence& seq) {
  params.validate();
  const Activations a = run_encoder(params, stack_segments({seq}));
  std::vector<lfq::LatentVector> latents;
  latents.reserve(static_cast<std::size_t>(a.z.cols()));
  for (Eigen::Index s = 0; s < a.z.cols(); ++s) {
    latents.emplace_back(a.z.col(s));
  }
  return latents;
}

MotionSequence decode(const ToyVaeParams& params, const std::vector<lfq::QuantizedCode>& codes,
                      int fps, bool is_canonical) {
  params.validate();
  if (codes.empty()) {
    throw InvalidArgument("decode needs at least one code");
  }
  MatrixXd bits(params.latent_dims(), static_cast<Eigen::Index>(codes.size()));
  for (std::size_t s = 0; s < codes.size(); ++s) {
    if (codes[s].bits.size() != params.latent_dims()) {
      throw InvalidArgument("code dimension does not match the decoder");
    }
    bits.col(static_cast<Eigen::Index>(s)) = codes[s].bits;
  }
  const MatrixXd xhat = decode_matrix(params, bits);
  return MotionSequence(xhat.transpose(), fps, is_canonical);
}

std::vector<std::uint32_t> tokenize(const ToyVaeParams& params, const MotionSequence& seq) {
  const lfq::LfqCodebook codebook(params.vocab_size);
  std::vector<std::uint32_t> tokens;
  for (const auto& z : encode(params, seq)) {
    tokens.push_back(lfq::quantize(z, codebook).index);
  }
  return tokens;
}

MotionSequence reconstruct(const ToyVaeParams& params, const MotionSequence& seq) {
  const lfq::LfqCodebook codebook(params.vocab_size);
  std::vector<lfq::QuantizedCode> codes;
  for (const auto& z : encode(params, seq)) {
    codes.push_back(lfq::quantize(z, codebook));
  }
  return decode(params, codes, seq.fps(), seq.is_canonical());
}

FrozenCodes freeze_codes(const ToyVaeParams& params, const MatrixXd& frames) {
  const Activations a = run_encoder(params, frames);
  FrozenCodes frozen;
  frozen.bits = sign_bits(a.z);
  frozen.offsets = frozen.bits - a.z;
  return frozen;
}

LossBreakdown loss_and_gradient(const ToyVaeParams& p, const ToyVaeConfig& config,
                                const MatrixXd& frames, VectorXd* gradient,
                                const FrozenCodes* frozen) {
  if (frames.rows() != kFrameWidth || frames.cols() == 0 || frames.cols() % kSegmentFrames != 0) {
    throw InvalidArgument("batch must be 75 x 8S stacked frames");
  }
  const Eigen::Index segments = frames.cols() / kSegmentFrames;
  const Eigen::Index h = p.hidden_width;

  Activations a = run_encoder(p, frames);
  if (frozen != nullptr) {
    if (frozen->offsets.rows() != a.z.rows() || frozen->offsets.cols() != segments) {
      throw InvalidArgument("frozen codes do not match the batch");
    }
    a.bits = frozen->bits;
    a.zbar = a.z + frozen->offsets;
  } else {
    a.bits = sign_bits(a.z);
    a.zbar = a.bits;  // forward value of z + sg(bits - z)
  }
  run_decoder(p, a);

  const double elements = static_cast<double>(frames.size());
  const MatrixXd error = a.xhat - frames;
  const MatrixXd commit_residual = a.z - a.bits;
  Eigen::MatrixXd entropy_grad;
  LossBreakdown loss;
  loss.recon = error.squaredNorm() / elements;
  loss.commit = commit_residual.squaredNorm() / static_cast<double>(segments);
  loss.entropy = lfq::entropy_loss_with_grad(a.z.transpose(), config.entropy_temperature,
                                             entropy_grad);
  loss.total = config.lambda_recon * loss.recon + config.lambda_commit * loss.commit +
               config.lambda_entropy * loss.entropy;

  if (gradient == nullptr) {
    return loss;
  }

  ToyVaeParams g = p;
  // Decoder.
  const MatrixXd d_y =
      reshaped(((error * (2.0 * config.lambda_recon / elements)).array().colwise() *
                p.input_scale.array())
                   .matrix(),
               2 * kFrameWidth, 4 * segments);
  g.dec_w3 = d_y * a.g2.transpose();
  g.dec_b3 = d_y.rowwise().sum();
  const MatrixXd d_u2 = reshaped(tanh_backward(p.dec_w3.transpose() * d_y, a.g2), 2 * h,
                                 2 * segments);
  g.dec_w2 = d_u2 * a.g1.transpose();
  g.dec_b2 = d_u2.rowwise().sum();
  const MatrixXd d_u1 = reshaped(tanh_backward(p.dec_w2.transpose() * d_u2, a.g1), 2 * h,
                                 segments);
  g.dec_w1 = d_u1 * a.g0.transpose();
  g.dec_b1 = d_u1.rowwise().sum();
  const MatrixXd d_a0 = tanh_backward(p.dec_w1.transpose() * d_u1, a.g0);
  g.dec_wp = d_a0 * a.zbar.transpose();
  g.dec_bp = d_a0.rowwise().sum();

  // Straight-through: the decoder-input gradient passes to z unchanged.
  const MatrixXd d_z = p.dec_wp.transpose() * d_a0 +
                       commit_residual * (2.0 * config.lambda_commit /
                                          static_cast<double>(segments)) +
                       entropy_grad.transpose() * config.lambda_entropy;

  // Encoder.
  g.enc_wz = d_z * a.h3.transpose();
  g.enc_bz = d_z.rowwise().sum();
  const MatrixXd d_a3 = tanh_backward(p.enc_wz.transpose() * d_z, a.h3);
  g.enc_w3 = d_a3 * reshaped(a.h2, 2 * h, segments).transpose();
  g.enc_b3 = d_a3.rowwise().sum();
  const MatrixXd d_a2 =
      tanh_backward(reshaped(p.enc_w3.transpose() * d_a3, h, 2 * segments), a.h2);
  g.enc_w2 = d_a2 * reshaped(a.h1, 2 * h, 2 * segments).transpose();
  g.enc_b2 = d_a2.rowwise().sum();
  const MatrixXd d_a1 =
      tanh_backward(reshaped(p.enc_w2.transpose() * d_a2, h, 4 * segments), a.h1);
  g.enc_w1 = d_a1 * a.x1.transpose();
  g.enc_b1 = d_a1.rowwise().sum();

  *gradient = g.flatten();
  return loss;
}

TrainResult train(const ToyVaeConfig& config, const std::vector<MotionSequence>& dataset) {
  config.validate();
  if (dataset.empty()) {
    throw InvalidArgument("training dataset is empty");
  }
  const std::size_t per_batch =
      config.batch_size == 0 ? dataset.size() : static_cast<std::size_t>(config.batch_size);
  std::vector<MatrixXd> batches;
  for (std::size_t start = 0; start < dataset.size(); start += per_batch) {
    const auto stop = std::min(dataset.size(), start + per_batch);
    batches.push_back(stack_segments(
        std::vector<MotionSequence>(dataset.begin() + static_cast<std::ptrdiff_t>(start),
                                    dataset.begin() + static_cast<std::ptrdiff_t>(stop))));
  }
  const MatrixXd everything = batches.size() == 1 ? batches.front() : stack_segments(dataset);

  ToyVaeParams params = init_params(config);
  fit_normalization(params, everything);
  VectorXd flat = params.flatten();
  VectorXd gradient;

  auto check_finite = [&](const LossBreakdown& loss, int epoch) {
    if (!std::isfinite(loss.total) || !gradient.allFinite()) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << ": recon=" << loss.recon
          << " commit=" << loss.commit << " entropy=" << loss.entropy
          << " (try a smaller learning rate)";
      throw NumericalError(msg.str());
    }
  };

  TrainResult result;
  result.params = params;
  double best = std::numeric_limits<double>::infinity();
  auto record = [&](int epoch, const LossBreakdown& loss) {
    if (loss.total < best) {
      best = loss.total;
      result.params = params;
    }
    result.history.push_back({epoch, loss, best});
  };

  if (batches.size() == 1) {
    // Full batch: the loss evaluated for the next step is also this epoch's record.
    LossBreakdown loss = loss_and_gradient(params, config, everything, &gradient);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      check_finite(loss, epoch);
      flat -= config.learning_rate * gradient;
      params.unflatten(flat);
      loss = loss_and_gradient(params, config, everything, &gradient);
      check_finite(loss, epoch);
      record(epoch, loss);
    }
    return result;
  }

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (const auto& batch : batches) {
      check_finite(loss_and_gradient(params, config, batch, &gradient), epoch);
      flat -= config.learning_rate * gradient;
      params.unflatten(flat);
    }
    const LossBreakdown loss = loss_and_gradient(params, config, everything, nullptr);
    check_finite(loss, epoch);
    record(epoch, loss);
  }
  return result;
}

std::string loss_history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,recon,commit,entropy,total\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << r.loss.recon << ',' << r.loss.commit << ',' << r.loss.entropy << ','
        << r.loss.total << '\n';
  }
  return out.str();
}

void save_params(const std::filesystem::path& path, const ToyVaeParams& params) {
  params.validate();
  io::ByteWriter w;
  w.magic("MVAE");
  w.u32(kParamsVersion);
  w.u32(params.vocab_size);
  w.u32(static_cast<std::uint32_t>(params.hidden_width));
  w.u32(kNumTensors);
  auto write_tensor = [&](const auto& t) {
    w.u32(static_cast<std::uint32_t>(t.rows()));
    w.u32(static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        w.f32(static_cast<float>(t(r, c)));
      }
    }
  };
  for_each_tensor(params, write_tensor);
  write_tensor(params.input_mean);
  write_tensor(params.input_scale);
  io::write_file_atomic(path, w.bytes());
}

ToyVaeParams load_params(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes, ".vae");
  r.expect_magic("MVAE");
  if (r.u32() != kParamsVersion) {
    throw FormatError(".vae: unsupported version");
  }
  ToyVaeParams p;
  p.vocab_size = r.u32();
  p.hidden_width = static_cast<int>(r.u32());
  if (r.u32() != kNumTensors) {
    throw FormatError(".vae: expected " + std::to_string(kNumTensors) + " tensors");
  }
  auto read_tensor = [&](auto& t) {
    const auto rows = static_cast<Eigen::Index>(r.u32());
    const auto cols = static_cast<Eigen::Index>(r.u32());
    if (rows * cols * 4 > static_cast<Eigen::Index>(r.remaining())) {
      throw FormatError(".vae: tensor larger than file");
    }
    using Tensor = std::decay_t<decltype(t)>;
    if constexpr (Tensor::ColsAtCompileTime == 1) {
      if (cols != 1) {
        throw FormatError(".vae: bias tensor must have one column");
      }
      t.resize(rows);
    } else {
      t.resize(rows, cols);
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        t(i, j) = r.f32();
      }
    }
  };
  for_each_tensor(p, read_tensor);
  read_tensor(p.input_mean);
  read_tensor(p.input_scale);
  r.expect_end();
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string(".vae: ") + e.what());
  }
  return p;
}

}  // namespace motok::vae
