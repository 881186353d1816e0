#include "motok/binary_io.hpp"

#include "motok/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <system_error>

#include <unistd.h>

namespace motok::io {

void ByteWriter::magic(std::string_view four_cc) {
  bytes_.insert(bytes_.end(), four_cc.begin(), four_cc.end());
}

void ByteWriter::u8(std::uint8_t value) { bytes_.push_back(value); }

void ByteWriter::u16(std::uint16_t value) {
  bytes_.push_back(static_cast<std::uint8_t>(value & 0xFF));
  bytes_.push_back(static_cast<std::uint8_t>(value >> 8));
}

void ByteWriter::u32(std::uint32_t value) {
  for (int shift = 0; shift < 32; shift += 8) {
    bytes_.push_back(static_cast<std::uint8_t>((value >> shift) & 0xFF));
  }
}

void ByteWriter::f32(float value) { u32(std::bit_cast<std::uint32_t>(value)); }

std::span<const std::uint8_t> ByteReader::take(std::size_t count) {
  if (remaining() < count) {
    throw FormatError(std::string(what_) + ": unexpected end of data");
  }
  auto out = bytes_.subspan(offset_, count);
  offset_ += count;
  return out;
}

void ByteReader::expect_magic(std::string_view four_cc) {
  const auto got = take(four_cc.size());
  if (std::memcmp(got.data(), four_cc.data(), four_cc.size()) != 0) {
    throw FormatError(std::string(what_) + ": bad magic, expected " + std::string(four_cc));
  }
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint16_t ByteReader::u16() {
  const auto b = take(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  const auto b = take(4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

void ByteReader::expect_end() const {
  if (offset_ != bytes_.size()) {
    throw FormatError(std::string(what_) + ": trailing bytes after payload");
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FormatError("cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw FormatError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError("cannot move output into place at " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace motok::io
