#include "motok/formats.hpp"

#include "motok/binary_io.hpp"
#include "motok/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace motok::formats {
namespace {

void expect_version(std::uint32_t found, std::uint32_t supported, const char* what) {
  if (found != supported) {
    throw FormatError(std::string(what) + ": unsupported version " + std::to_string(found));
  }
}

float to_f32(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + ": refusing to write a non-finite value");
  }
  return static_cast<float>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_motion(const MotionSequence& seq) {
  io::ByteWriter w;
  w.magic("MSEQ");
  w.u32(kMotionVersion);
  w.u32(static_cast<std::uint32_t>(seq.num_frames()));
  w.u32(static_cast<std::uint32_t>(seq.fps()));
  w.u8(seq.is_canonical() ? 1 : 0);
  const FrameMatrix& f = seq.frames();
  for (Eigen::Index t = 0; t < f.rows(); ++t) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      w.f32(to_f32(f(t, c), "motion"));
    }
  }
  return w.bytes();
}

MotionSequence decode_motion(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "motion file");
  r.expect_magic("MSEQ");
  expect_version(r.u32(), kMotionVersion, "motion file");
  const std::uint32_t t = r.u32();
  const std::uint32_t fps = r.u32();
  const std::uint8_t canonical = r.u8();
  if (canonical > 1) {
    throw FormatError("motion file: canonical flag must be 0 or 1");
  }
  if (t == 0 || t > static_cast<std::uint32_t>(kMaxFrames)) {
    throw FormatError("motion file: frame count " + std::to_string(t) + " out of range");
  }
  if (r.remaining() != static_cast<std::size_t>(t) * layout::kFrameWidth * 4) {
    throw FormatError("motion file: payload size does not match the header");
  }
  FrameMatrix frames(t, layout::kFrameWidth);
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    for (Eigen::Index c = 0; c < frames.cols(); ++c) {
      frames(i, c) = r.f32();
    }
  }
  r.expect_end();
  return MotionSequence(std::move(frames), static_cast<int>(fps), canonical == 1);
}

void save_motion(const std::filesystem::path& path, const MotionSequence& seq) {
  io::write_file_atomic(path, encode_motion(seq));
}

MotionSequence load_motion(const std::filesystem::path& path) {
  return decode_motion(io::read_file(path));
}

std::vector<MotionSequence> load_motion_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw InvalidArgument("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mseq") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    throw InvalidArgument("no .mseq files in " + dir.string());
  }
  std::vector<MotionSequence> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    out.push_back(load_motion(p));
  }
  return out;
}

std::vector<std::uint8_t> encode_tokens(const lfq::TokenStream& tokens) {
  if (tokens.vocab_size == 0 || tokens.vocab_size > 65536) {
    throw InvalidArgument("token files hold vocabularies of at most 65536");
  }
  io::ByteWriter w;
  w.magic("MTOK");
  w.u32(kTokenVersion);
  w.u32(tokens.vocab_size);
  w.u32(static_cast<std::uint32_t>(tokens.tokens.size()));
  w.u32(tokens.segment_len);
  for (const std::uint32_t t : tokens.tokens) {
    if (t >= tokens.vocab_size) {
      throw InvalidArgument("token " + std::to_string(t) + " outside the vocabulary");
    }
    w.u16(static_cast<std::uint16_t>(t));
  }
  return w.bytes();
}

lfq::TokenStream decode_tokens(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "token file");
  r.expect_magic("MTOK");
  expect_version(r.u32(), kTokenVersion, "token file");
  lfq::TokenStream out;
  out.vocab_size = r.u32();
  const std::uint32_t n = r.u32();
  out.segment_len = r.u32();
  if (out.vocab_size == 0 || out.vocab_size > 65536) {
    throw FormatError("token file: vocabulary size out of range");
  }
  if (r.remaining() != static_cast<std::size_t>(n) * 2) {
    throw FormatError("token file: payload size does not match the header");
  }
  out.tokens.resize(n);
  for (auto& t : out.tokens) {
    t = r.u16();
    if (t >= out.vocab_size) {
      throw FormatError("token file: token outside the vocabulary");
    }
  }
  r.expect_end();
  return out;
}

void save_tokens(const std::filesystem::path& path, const lfq::TokenStream& tokens) {
  io::write_file_atomic(path, encode_tokens(tokens));
}

lfq::TokenStream load_tokens(const std::filesystem::path& path) {
  return decode_tokens(io::read_file(path));
}

std::vector<std::uint8_t> encode_voxels(const scene::SceneVoxelGrid& grid) {
  io::ByteWriter w;
  w.magic("SVOX");
  w.u32(kVoxelVersion);
  w.u32(static_cast<std::uint32_t>(grid.nx()));
  w.u32(static_cast<std::uint32_t>(grid.ny()));
  w.u32(static_cast<std::uint32_t>(grid.nz()));
  for (int a = 0; a < 3; ++a) {
    w.f32(to_f32(grid.origin()[a], "voxel origin"));
  }
  w.f32(to_f32(grid.cell_size(), "voxel cell size"));
  const auto& occ = grid.occupancy();
  for (std::size_t i = 0; i < occ.size(); i += 8) {
    std::uint8_t byte = 0;
    for (std::size_t b = 0; b < 8 && i + b < occ.size(); ++b) {
      if (occ[i + b] != 0) {
        byte = static_cast<std::uint8_t>(byte | (1U << b));
      }
    }
    w.u8(byte);
  }
  return w.bytes();
}

scene::SceneVoxelGrid decode_voxels(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "voxel file");
  r.expect_magic("SVOX");
  expect_version(r.u32(), kVoxelVersion, "voxel file");
  const std::uint32_t h = r.u32();
  const std::uint32_t wd = r.u32();
  const std::uint32_t d = r.u32();
  Eigen::Vector3d origin;
  for (int a = 0; a < 3; ++a) {
    origin[a] = r.f32();
  }
  const double cell = r.f32();
  constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 31;
  if (h == 0 || wd == 0 || d == 0 ||
      static_cast<std::uint64_t>(h) * wd * d > kMaxCells) {
    throw FormatError("voxel file: grid extents out of range");
  }
  const std::size_t cells = static_cast<std::size_t>(h) * wd * d;
  if (r.remaining() != (cells + 7) / 8) {
    throw FormatError("voxel file: payload size does not match the header");
  }
  scene::SceneVoxelGrid grid(static_cast<int>(h), static_cast<int>(wd), static_cast<int>(d),
                             origin, cell);
  std::vector<std::uint8_t> packed(r.remaining());
  for (auto& b : packed) {
    b = r.u8();
  }
  r.expect_end();
  std::size_t index = 0;
  for (int k = 0; k < grid.nz(); ++k) {
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i, ++index) {
        if ((packed[index / 8] >> (index % 8)) & 1U) {
          grid.set_occupied(i, j, k);
        }
      }
    }
  }
  return grid;
}

void save_voxels(const std::filesystem::path& path, const scene::SceneVoxelGrid& grid) {
  io::write_file_atomic(path, encode_voxels(grid));
}

scene::SceneVoxelGrid load_voxels(const std::filesystem::path& path) {
  return decode_voxels(io::read_file(path));
}

void save_points(const std::filesystem::path& path, const scene::PointCloud& points) {
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(points.rows()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (int c = 0; c < 3; ++c) {
      w.f32(to_f32(points(r, c), "points"));
    }
  }
  io::write_file_atomic(path, w.bytes());
}

scene::PointCloud load_points(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes, "point file");
  const std::uint32_t n = r.u32();
  if (n == 0) {
    throw FormatError("point file: no points");
  }
  if (r.remaining() != static_cast<std::size_t>(n) * 12) {
    throw FormatError("point file: payload size does not match the header");
  }
  scene::PointCloud points(n, 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      points(i, c) = r.f32();
    }
  }
  r.expect_end();
  return points;
}

void save_features(const std::filesystem::path& path, const Eigen::MatrixXd& features) {
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      w.f32(to_f32(features(r, c), "features"));
    }
  }
  io::write_file_atomic(path, w.bytes());
}

Eigen::MatrixXd load_features(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes, "feature file");
  const std::uint32_t n = r.u32();
  const std::uint32_t f = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * f * 4) {
    throw FormatError("feature file: payload size does not match the header");
  }
  Eigen::MatrixXd features(n, f);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      features(i, c) = r.f32();
    }
  }
  r.expect_end();
  return features;
}

}  // namespace motok::formats
