#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace motok::io {

/// Appends little-endian primitives to a byte buffer.
class ByteWriter {
 public:
  void magic(std::string_view four_cc);
  void u8(std::uint8_t value);
  void u16(std::uint16_t value);
  void u32(std::uint32_t value);
  void f32(float value);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Reads little-endian primitives; throws FormatError on truncated input.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string_view what)
      : bytes_(bytes), what_(what) {}

  void expect_magic(std::string_view four_cc);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();

  std::size_t remaining() const { return bytes_.size() - offset_; }
  void expect_end() const;

 private:
  std::span<const std::uint8_t> take(std::size_t count);

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
  std::string_view what_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers never
/// observe a partially written target.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace motok::io
