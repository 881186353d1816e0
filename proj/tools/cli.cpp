#include "cli.hpp"

#include "motok/binary_io.hpp"
#include "motok/config.hpp"
#include "motok/ddim.hpp"
#include "motok/error.hpp"
#include "motok/formats.hpp"
#include "motok/kinematics.hpp"
#include "motok/lfq.hpp"
#include "motok/metrics.hpp"
#include "motok/populate.hpp"
#include "motok/rotation.hpp"
#include "motok/scene.hpp"
#include "motok/toy_vae.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace motok::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Bad paths and inconsistent flag combinations found after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_output_dir(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory does not exist: " + parent.string());
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

Eigen::Vector3d vector3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

// Keypoints expressed in the object's own frame, per frame.
scene::KeypointTrack keypoints_in_object_frame(const MotionSequence& seq,
                                               const scene::KeypointTrack& keypoints) {
  scene::KeypointTrack out;
  out.reserve(keypoints.size());
  for (int t = 0; t < seq.num_frames(); ++t) {
    const SixDof pose = seq.object_pose(t);
    const Eigen::Matrix3d r = axis_angle_to_matrix(pose.orientation);
    scene::PointCloud local = keypoints[static_cast<std::size_t>(t)].rowwise() -
                              pose.translation.transpose();
    out.push_back(local * r);
  }
  return out;
}

struct GeometryInputs {
  std::string scene;
  std::string motion;
  std::string object;
  double object_cell = 0.02;
  double contact_threshold = scene::kContactThreshold;
};

// collision (human vs object), collision_scene (human vs scene) and contact, for the
// inputs that are present.
std::map<std::string, double> geometry_metrics(const GeometryInputs& in) {
  std::map<std::string, double> out;
  if (in.motion.empty()) {
    if (!in.scene.empty() || !in.object.empty()) {
      throw UsageError("--scene and --object need --motion");
    }
    return out;
  }
  const MotionSequence seq = formats::load_motion(in.motion);
  const scene::KeypointTrack keypoints = kinematics::body_keypoints(seq);
  if (!in.scene.empty()) {
    const auto sdf = scene::build_sdf(formats::load_voxels(in.scene));
    out["collision_scene"] = scene::collision_score(keypoints, sdf).penetration;
  }
  if (!in.object.empty()) {
    const scene::PointCloud local = formats::load_points(in.object);
    const auto object_sdf = scene::build_sdf(scene::voxelize_points(local, in.object_cell));
    out["collision"] =
        scene::collision_score(keypoints_in_object_frame(seq, keypoints), object_sdf).penetration;
    out["contact"] = scene::contact_score(keypoints, kinematics::object_points(seq, local),
                                          in.contact_threshold);
  }
  return out;
}

const std::vector<std::string> kReportColumns = {"fid",  "r1",        "r2",        "r3",
                                                 "mmd",  "diversity", "collision", "collision_scene",
                                                 "contact"};

// ---------------------------------------------------------------------------------------
// Subcommands. Each registers its options and returns the action to run after parsing.

using Action = std::function<int()>;
using Registered = std::pair<CLI::App*, Action>;

Registered add_convert(CLI::App& app, std::ostream& /*out*/) {
  auto* cmd = app.add_subcommand("convert", "Convert a motion between canonical and global form");
  struct Opts {
    std::string in, out;
    bool to_global = false, to_canonical = false;
    std::vector<double> translation{0, 0, 0}, orientation{0, 0, 0};
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--in", o->in, "Input .mseq")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output .mseq")->required();
  auto* g = cmd->add_flag("--to-global", o->to_global, "Place a canonical motion in the world");
  auto* c = cmd->add_flag("--to-canonical", o->to_canonical, "Remove the starting position and heading");
  g->excludes(c);
  cmd->add_option("--translation", o->translation, "Root placement x,y,z (meters) for --to-global")
      ->expected(3)->delimiter(',');
  cmd->add_option("--orientation", o->orientation, "Root placement axis-angle (radians) for --to-global")
      ->expected(3)->delimiter(',');
  return {cmd, [o] {
    if (o->to_global == o->to_canonical) {
      throw UsageError("convert needs exactly one of --to-global or --to-canonical");
    }
    require_output_dir(o->out);
    const MotionSequence seq = formats::load_motion(o->in);
    if (o->to_global) {
      SixDof pose{vector3(o->translation), vector3(o->orientation)};
      pose.validate();
      formats::save_motion(o->out, to_global(seq, pose));
    } else {
      formats::save_motion(o->out, to_canonical(seq));
    }
    return kExitOk;
  }};
}

Registered add_tokenize(CLI::App& app, std::ostream& /*out*/) {
  auto* cmd = app.add_subcommand("tokenize", "Encode a motion into LFQ tokens");
  struct Opts {
    std::string vae, in, out;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--vae", o->vae, "Trained .vae parameters")->required()->check(CLI::ExistingFile);
  cmd->add_option("--in", o->in, "Input .mseq")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output .mtok")->required();
  return {cmd, [o] {
    require_output_dir(o->out);
    const auto params = vae::load_params(o->vae);
    lfq::TokenStream stream;
    stream.vocab_size = params.vocab_size;
    stream.segment_len = vae::kSegmentFrames;
    stream.tokens = vae::tokenize(params, formats::load_motion(o->in));
    formats::save_tokens(o->out, stream);
    return kExitOk;
  }};
}

Registered add_detokenize(CLI::App& app, std::ostream& /*out*/) {
  auto* cmd = app.add_subcommand("detokenize", "Decode LFQ tokens back into a motion");
  struct Opts {
    std::string vae, in, out;
    int fps = kDefaultFps;
    bool canonical = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--vae", o->vae, "Trained .vae parameters")->required()->check(CLI::ExistingFile);
  cmd->add_option("--in", o->in, "Input .mtok")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output .mseq")->required();
  cmd->add_option("--fps", o->fps, "Frame rate recorded in the output")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--canonical", o->canonical, "Mark the output as canonical");
  return {cmd, [o] {
    require_output_dir(o->out);
    const auto params = vae::load_params(o->vae);
    const auto stream = formats::load_tokens(o->in);
    if (stream.vocab_size != params.vocab_size) {
      throw InvalidArgument("token vocabulary " + std::to_string(stream.vocab_size) +
                            " does not match the VAE vocabulary " +
                            std::to_string(params.vocab_size));
    }
    if (stream.segment_len != static_cast<std::uint32_t>(vae::kSegmentFrames)) {
      throw InvalidArgument("token segments must cover 8 frames");
    }
    const lfq::LfqCodebook codebook(params.vocab_size);
    std::vector<lfq::QuantizedCode> codes;
    codes.reserve(stream.tokens.size());
    for (const auto t : stream.tokens) {
      codes.push_back(lfq::index_to_bits(t, codebook));
    }
    formats::save_motion(o->out, vae::decode(params, codes, o->fps, o->canonical));
    return kExitOk;
  }};
}

struct VaeOverrides {
  std::optional<std::uint32_t> vocab_size;
  std::optional<int> hidden_width, epochs, batch_size;
  std::optional<double> learning_rate, lambda_entropy;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
};

void add_vae_overrides(CLI::App* cmd, VaeOverrides& v) {
  cmd->add_option("--vocab-size", v.vocab_size, "Override vocab_size");
  cmd->add_option("--hidden-width", v.hidden_width, "Override hidden_width");
  cmd->add_option("--epochs", v.epochs, "Override epochs");
  cmd->add_option("--batch-size", v.batch_size, "Override batch_size");
  cmd->add_option("--learning-rate", v.learning_rate, "Override learning_rate");
  cmd->add_option("--lambda-entropy", v.lambda_entropy, "Override lambda_entropy");
  cmd->add_option("--seed", v.seed, "Override seed");
  cmd->add_option("--set", v.set, "Override any config key: key=value (repeatable)");
}

// Configuration mistakes are usage errors: bad keys or values, or an unreadable file.
vae::ToyVaeConfig resolve_vae_config(const std::string& file, const VaeOverrides& v) try {
  config::KeyValues values = file.empty() ? config::KeyValues{} : config::load_key_values(file);
  for (const auto& kv : v.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--set expects key=value, got '" + kv + "'");
    }
    values[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  auto put = [&](const char* key, const auto& opt) {
    if (opt) {
      std::ostringstream os;
      os.precision(17);
      os << *opt;
      values[key] = os.str();
    }
  };
  put("vocab_size", v.vocab_size);
  put("hidden_width", v.hidden_width);
  put("epochs", v.epochs);
  put("batch_size", v.batch_size);
  put("learning_rate", v.learning_rate);
  put("lambda_entropy", v.lambda_entropy);
  put("seed", v.seed);
  return config::vae_config_from(values);
} catch (const Error& e) {
  throw UsageError(e.what());
}

Registered add_train_vae(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("train-vae", "Train the toy LFQ autoencoder");
  struct Opts {
    std::string config, data, out, history;
    VaeOverrides overrides;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--config", o->config, "Flat key = value training config")->check(CLI::ExistingFile);
  cmd->add_option("--data", o->data, "Directory of .mseq training clips")->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--out", o->out, "Output .vae")->required();
  cmd->add_option("--history", o->history,
                  "Loss history CSV (default: loss_history.csv beside --out)");
  add_vae_overrides(cmd, o->overrides);
  return {cmd, [o, &out] {
    require_output_dir(o->out);
    const fs::path history =
        o->history.empty() ? fs::path(o->out).parent_path() / "loss_history.csv" : fs::path(o->history);
    require_output_dir(history);
    const vae::ToyVaeConfig config = resolve_vae_config(o->config, o->overrides);
    const auto dataset = formats::load_motion_dir(o->data);
    const auto result = vae::train(config, dataset);
    vae::save_params(o->out, result.params);
    io::write_text_atomic(history, vae::loss_history_csv(result.history));
    out << "trained on " << dataset.size() << " clips, best total loss "
        << format_number(result.history.back().best_total) << '\n';
    return kExitOk;
  }};
}

Registered add_sample(CLI::App& app, std::ostream& /*out*/) {
  auto* cmd = app.add_subcommand("sample", "Sample a waypoint track with DDIM and the toy denoiser");
  struct Opts {
    std::string out, denoiser = "gaussian";
    int steps = 20, waypoints = 10;
    double cfg_scale = 2.5, data_mean = 0.0, data_sigma = 1.0, text_mean = 1.0;
    std::uint64_t seed = 0;
    bool hierarchical = false, no_text = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--out", o->out, "Output .mseq (one frame per waypoint, fps 1)")->required();
  cmd->add_option("--steps", o->steps, "DDIM inference steps")->capture_default_str()
      ->check(CLI::Range(1, 1000));
  cmd->add_option("--cfg-scale", o->cfg_scale, "Classifier-free guidance scale (default is arbitrary)")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o->seed, "Initial-noise seed")->capture_default_str();
  cmd->add_option("--waypoints", o->waypoints, "Waypoints to sample (one per second)")
      ->capture_default_str()->check(CLI::Range(1, kMaxFrames));
  cmd->add_option("--denoiser", o->denoiser, "Registered toy denoiser")->capture_default_str()
      ->check(CLI::IsMember({"gaussian"}));
  cmd->add_option("--data-mean", o->data_mean, "Unconditional data mean of the toy denoiser")
      ->capture_default_str();
  cmd->add_option("--data-sigma", o->data_sigma, "Data standard deviation of the toy denoiser")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--text-mean", o->text_mean, "Text-conditioned data mean of the toy denoiser")
      ->capture_default_str();
  cmd->add_flag("--no-text", o->no_text, "Sample without a text condition");
  cmd->add_flag("--hierarchical", o->hierarchical, "Coarse-to-fine two-pass sampling");
  return {cmd, [o] {
    require_output_dir(o->out);
    const ddim::NoiseSchedule schedule;
    const auto denoiser =
        ddim::gaussian_posterior_denoiser(schedule, o->data_mean, o->data_sigma, o->text_mean);
    ddim::GuidanceConfig guidance;
    guidance.scale = o->cfg_scale;
    if (!o->no_text) {
      guidance.condition.text = Eigen::VectorXd::Ones(1);
    }
    const Eigen::MatrixXd track =
        o->hierarchical
            ? ddim::ddim_sample_hierarchical(denoiser, o->waypoints, layout::kWaypointWidth,
                                             schedule, o->steps, guidance, o->seed)
            : ddim::ddim_sample(denoiser, o->waypoints, layout::kWaypointWidth, schedule,
                                o->steps, guidance, o->seed);
    FrameMatrix frames = FrameMatrix::Zero(track.rows(), layout::kFrameWidth);
    frames.leftCols<6>() = track.leftCols<6>();
    frames.rightCols<6>() = track.rightCols<6>();
    formats::save_motion(o->out, MotionSequence(std::move(frames), 1, false));
    return kExitOk;
  }};
}

Registered add_populate(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("populate", "Place a canonical motion in a voxel scene");
  struct Opts {
    std::string scene, motion, out, report, object;
    populate::PopulateConfig config;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--scene", o->scene, "Scene .vox")->required()->check(CLI::ExistingFile);
  cmd->add_option("--motion", o->motion, "Canonical .mseq")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Placed global .mseq")->required();
  cmd->add_option("--report", o->report, "Placement report .json")->required();
  cmd->add_option("--object", o->object, "Object .pts in the object frame; joins the collision score")
      ->check(CLI::ExistingFile);
  cmd->add_option("--yaw-samples", o->config.yaw_samples, "Yaw angles on the coarse lattice")
      ->capture_default_str();
  cmd->add_option("--search-radius", o->config.search_radius_cells,
                  "Coarse lattice half-width in cells")->capture_default_str();
  cmd->add_option("--refine-rounds", o->config.refine_rounds, "Refinement rounds")
      ->capture_default_str();
  cmd->add_option("--footprint-radius", o->config.footprint_radius,
                  "Clearance required at the seed (meters)")->capture_default_str();
  cmd->add_option("--threshold", o->config.feasibility_threshold,
                  "Feasible penetration (meters)")->capture_default_str();
  return {cmd, [o, &out] {
    require_output_dir(o->out);
    require_output_dir(o->report);
    o->config.validate();
    const auto grid = formats::load_voxels(o->scene);
    const MotionSequence seq = formats::load_motion(o->motion);
    std::optional<scene::PointCloud> object;
    if (!o->object.empty()) {
      object = formats::load_points(o->object);
    }
    Json report;
    try {
      const auto result = populate::optimize_placement(seq, grid, scene::build_sdf(grid),
                                                       o->config, object);
      report["offset"] = {{"x", result.offset.xz_translation.x()},
                          {"z", result.offset.xz_translation.y()},
                          {"yaw", result.offset.yaw}};
      report["collision"] = result.collision;
      report["feasible"] = result.feasible;
      report["candidates_evaluated"] = result.candidates_evaluated;
      io::write_text_atomic(o->report, report.dump(2) + "\n");
      if (!result.feasible) {
        out << "no collision-free placement; treat the motion as scene-less\n";
        return kExitDomainError;
      }
      formats::save_motion(o->out, result.placed);
    } catch (const SceneLessError& e) {
      report["offset"] = nullptr;
      report["collision"] = nullptr;
      report["feasible"] = false;
      report["candidates_evaluated"] = 0;
      io::write_text_atomic(o->report, report.dump(2) + "\n");
      throw;
    }
    return kExitOk;
  }};
}

Registered add_score(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("score", "Collision and contact scores of one motion as a report row");
  auto o = std::make_shared<GeometryInputs>();
  cmd->add_option("--motion", o->motion, "Global .mseq")->required()->check(CLI::ExistingFile);
  cmd->add_option("--scene", o->scene, "Scene .vox")->check(CLI::ExistingFile);
  cmd->add_option("--object", o->object, "Object .pts in the object frame")->check(CLI::ExistingFile);
  cmd->add_option("--object-cell", o->object_cell, "Voxel size for the object SDF (meters)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--contact-threshold", o->contact_threshold, "Contact distance (meters)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  return {cmd, [o, &out] {
    const auto values = geometry_metrics(*o);
    std::string header, row;
    for (std::size_t i = 0; i < kReportColumns.size(); ++i) {
      const auto& key = kReportColumns[i];
      header += (i ? "," : "") + key;
      row += i ? "," : "";
      if (const auto it = values.find(key); it != values.end()) {
        row += format_number(it->second);
      }
    }
    out << header << '\n' << row << '\n';
    return kExitOk;
  }};
}

Registered add_eval(CLI::App& app, std::ostream& err) {
  auto* cmd = app.add_subcommand("eval", "Distribution metrics over feature files");
  struct Opts {
    std::string real, gen, text, report;
    int pool_size = 32, pairs = 300;
    std::uint64_t seed = 0;
    GeometryInputs geometry;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--real", o->real, "Real-motion features .feat")->required()->check(CLI::ExistingFile);
  cmd->add_option("--gen", o->gen, "Generated-motion features .feat")->required()->check(CLI::ExistingFile);
  cmd->add_option("--text", o->text, "Text features .feat, row-aligned with --gen")->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--report", o->report, "Output report .json")->required();
  cmd->add_option("--pool-size", o->pool_size, "R-precision pool size")->capture_default_str();
  cmd->add_option("--pairs", o->pairs, "Diversity pairs")->capture_default_str();
  cmd->add_option("--seed", o->seed, "Seed for pools and pairs")->capture_default_str();
  cmd->add_option("--scene", o->geometry.scene, "Scene .vox for collision_scene")->check(CLI::ExistingFile);
  cmd->add_option("--motion", o->geometry.motion, "Global .mseq for geometry metrics")
      ->check(CLI::ExistingFile);
  cmd->add_option("--object", o->geometry.object, "Object .pts for collision and contact")
      ->check(CLI::ExistingFile);
  return {cmd, [o, &err] {
    require_output_dir(o->report);
    const metrics::FeatureSet real{formats::load_features(o->real), metrics::FeatureKind::motion};
    const metrics::FeatureSet gen{formats::load_features(o->gen), metrics::FeatureKind::motion};
    const metrics::FeatureSet text{formats::load_features(o->text), metrics::FeatureKind::text};
    const auto geometry = geometry_metrics(o->geometry);
    const auto rp = metrics::r_precision(gen, text, o->pool_size, o->seed);
    const auto div = metrics::diversity(gen, o->pairs, o->seed);
    if (div.with_replacement) {
      err << "warning: fewer than 2 x " << o->pairs
          << " generated rows; diversity pairs were drawn with replacement\n";
    }
    Json report;
    report["fid"] =
        metrics::frechet_distance(metrics::gaussian_stats(real), metrics::gaussian_stats(gen));
    report["r1"] = rp.top1;
    report["r2"] = rp.top2;
    report["r3"] = rp.top3;
    report["mmd"] = metrics::multimodal_distance(gen, text);
    report["diversity"] = div.value;
    for (const char* key : {"collision", "collision_scene", "contact"}) {
      if (const auto it = geometry.find(key); it != geometry.end()) {
        report[key] = it->second;
      }
    }
    io::write_text_atomic(o->report, report.dump(2) + "\n");
    return kExitOk;
  }};
}

std::vector<std::uint32_t> parse_ks(const std::string& text) {
  std::vector<std::uint32_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
      ks.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--ks expects comma-separated integers, got '" + text + "'");
    }
  }
  if (ks.empty()) {
    throw UsageError("--ks is empty");
  }
  return ks;
}

struct SweepPoint {
  double recon = 0.0;
  lfq::Utilization utilization;
};

SweepPoint sweep_point(const vae::ToyVaeConfig& config, const std::vector<MotionSequence>& data,
                       const Eigen::MatrixXd& stacked) {
  const auto trained = vae::train(config, data);
  SweepPoint p;
  p.recon = vae::loss_and_gradient(trained.params, config, stacked, nullptr).recon;
  std::vector<std::uint32_t> tokens;
  for (const auto& seq : data) {
    const auto t = vae::tokenize(trained.params, seq);
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  p.utilization = lfq::codebook_utilization(tokens, lfq::LfqCodebook(config.vocab_size));
  return p;
}

Registered add_sweep_vocab(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand(
      "sweep-vocab", "Train one toy VAE per vocabulary size, with and without the entropy loss");
  struct Opts {
    std::string ks = "64,512,8192", data, config, out = "vocab_sweep.csv";
    bool no_ablation = false;
    VaeOverrides overrides;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--ks", o->ks, "Comma-separated vocabulary sizes")->capture_default_str();
  cmd->add_option("--data", o->data, "Directory of .mseq training clips")->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--config", o->config, "Flat key = value training config")->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output CSV")->capture_default_str();
  cmd->add_flag("--no-ablation", o->no_ablation, "Skip the paired lambda_entropy = 0 runs");
  add_vae_overrides(cmd, o->overrides);
  return {cmd, [o, &out] {
    require_output_dir(o->out);
    const auto ks = parse_ks(o->ks);
    vae::ToyVaeConfig base = resolve_vae_config(o->config, o->overrides);
    const auto data = formats::load_motion_dir(o->data);
    const Eigen::MatrixXd stacked = vae::stack_segments(data);
    std::ostringstream csv;
    csv << "k,lambda_entropy,recon_mse,utilization_fraction,utilization_entropy,"
           "ablation_recon_mse,ablation_utilization_fraction,ablation_utilization_entropy\n";
    for (const auto k : ks) {
      vae::ToyVaeConfig config = base;
      config.vocab_size = k;
      config.validate();
      const SweepPoint main = sweep_point(config, data, stacked);
      csv << k << ',' << format_number(config.lambda_entropy) << ','
          << format_number(main.recon) << ',' << format_number(main.utilization.fraction) << ','
          << format_number(main.utilization.entropy);
      if (o->no_ablation) {
        csv << ",,,\n";
      } else {
        config.lambda_entropy = 0.0;
        const SweepPoint ablation = sweep_point(config, data, stacked);
        csv << ',' << format_number(ablation.recon) << ','
            << format_number(ablation.utilization.fraction) << ','
            << format_number(ablation.utilization.entropy) << '\n';
      }
      out << "K=" << k << " recon_mse=" << format_number(main.recon) << '\n';
    }
    io::write_text_atomic(o->out, csv.str());
    return kExitOk;
  }};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Motion tokenization, diffusion sampling and scene-aware evaluation", "motok");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::vector<Registered> actions;
  auto reg = [&](Registered (*add)(CLI::App&, std::ostream&), std::ostream& stream) {
    actions.push_back(add(app, stream));
  };
  reg(add_convert, out);
  reg(add_tokenize, out);
  reg(add_detokenize, out);
  reg(add_train_vae, out);
  reg(add_sample, out);
  reg(add_populate, out);
  reg(add_score, out);
  reg(add_eval, err);
  reg(add_sweep_vocab, out);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) {
      return kExitOk;
    }
    const CLI::App* context = &app;
    for (const auto& [sub, action] : actions) {
      if (sub->parsed()) {
        context = sub;
      }
    }
    err << '\n' << context->help();
    return kExitUsage;
  }

  try {
    for (auto& [sub, action] : actions) {
      if (sub->parsed()) {
        return action();
      }
    }
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
}

}  // namespace motok::cli
