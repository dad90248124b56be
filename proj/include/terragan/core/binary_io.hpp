#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "terragan/core/tensor.hpp"

namespace terragan {

/// Little-endian primitive writer.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t size);
  void magic(std::string_view tag) { bytes(tag.data(), tag.size()); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  /// u32 length prefix followed by the bytes.
  void string(std::string_view s);

 private:
  std::ostream& out_;
};

/// Little-endian primitive reader; a short read throws CorruptionError.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in, std::string context = "stream")
      : in_(in), context_(std::move(context)) {}

  void bytes(void* data, std::size_t size);
  /// Throws CorruptionError unless the next bytes equal `tag`.
  void expect_magic(std::string_view tag);
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string string(std::size_t max_size = 1u << 26);

  const std::string& context() const { return context_; }

 private:
  std::istream& in_;
  std::string context_;
};

inline constexpr std::uint16_t kTensorFormatVersion = 1;

/// "TFTN" | u16 version | u16 rank | u64 extents | f32 values.
void write_tensor(BinaryWriter& out, const Tensor& tensor);
Tensor read_tensor(BinaryReader& in);

}  // namespace terragan
