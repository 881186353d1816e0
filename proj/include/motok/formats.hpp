#pragma once

#include "motok/lfq.hpp"
#include "motok/motion.hpp"
#include "motok/scene.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

/// Binary file formats. All integers and floats are little-endian; values are stored as
/// float32 and widened to double on load.
namespace motok::formats {

inline constexpr std::uint32_t kMotionVersion = 1;
inline constexpr std::uint32_t kTokenVersion = 1;
inline constexpr std::uint32_t kVoxelVersion = 1;

/// "MSEQ", u32 version, u32 T, u32 fps, u8 is_canonical, T x 75 f32 row-major.
std::vector<std::uint8_t> encode_motion(const MotionSequence& seq);
MotionSequence decode_motion(std::span<const std::uint8_t> bytes);
void save_motion(const std::filesystem::path& path, const MotionSequence& seq);
MotionSequence load_motion(const std::filesystem::path& path);

/// Every *.mseq file in a directory, in lexicographic path order.
std::vector<MotionSequence> load_motion_dir(const std::filesystem::path& dir);

/// "MTOK", u32 version, u32 K, u32 num_tokens, u32 segment_len, u16 tokens.
std::vector<std::uint8_t> encode_tokens(const lfq::TokenStream& tokens);
lfq::TokenStream decode_tokens(std::span<const std::uint8_t> bytes);
void save_tokens(const std::filesystem::path& path, const lfq::TokenStream& tokens);
lfq::TokenStream load_tokens(const std::filesystem::path& path);

/// "SVOX", u32 version, u32 H, u32 W, u32 D, f32 origin[3], f32 cell_size, occupancy
/// bits packed LSB-first in x-fastest order. H, W, D are the x, y, z extents.
std::vector<std::uint8_t> encode_voxels(const scene::SceneVoxelGrid& grid);
scene::SceneVoxelGrid decode_voxels(std::span<const std::uint8_t> bytes);
void save_voxels(const std::filesystem::path& path, const scene::SceneVoxelGrid& grid);
scene::SceneVoxelGrid load_voxels(const std::filesystem::path& path);

/// u32 n, n x 3 f32.
void save_points(const std::filesystem::path& path, const scene::PointCloud& points);
scene::PointCloud load_points(const std::filesystem::path& path);

/// u32 N, u32 F, N x F f32 row-major.
void save_features(const std::filesystem::path& path, const Eigen::MatrixXd& features);
Eigen::MatrixXd load_features(const std::filesystem::path& path);

}  // namespace motok::formats
