#include "terragan/core/binary_io.hpp"

#include <bit>
#include <cstring>

#include "terragan/core/errors.hpp"

namespace terragan {

namespace {

template <typename T>
void put_le(BinaryWriter& w, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  w.bytes(buf, sizeof(T));
}

template <typename T>
T get_le(BinaryReader& r) {
  unsigned char buf[sizeof(T)];
  r.bytes(buf, sizeof(T));
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

}  // namespace

void BinaryWriter::bytes(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out_) throw IoError("write failed");
}

void BinaryWriter::u16(std::uint16_t v) { put_le(*this, v); }
void BinaryWriter::u32(std::uint32_t v) { put_le(*this, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(*this, v); }
void BinaryWriter::f32(float v) { put_le(*this, std::bit_cast<std::uint32_t>(v)); }
void BinaryWriter::f64(double v) { put_le(*this, std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::string(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinaryReader::bytes(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in_.gcount()) != size) {
    throw CorruptionError(context_ + ": unexpected end of data");
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  bytes(got.data(), got.size());
  if (got != tag) throw CorruptionError(context_ + ": bad magic, expected " + std::string(tag));
}

std::uint16_t BinaryReader::u16() { return get_le<std::uint16_t>(*this); }
std::uint32_t BinaryReader::u32() { return get_le<std::uint32_t>(*this); }
std::uint64_t BinaryReader::u64() { return get_le<std::uint64_t>(*this); }
float BinaryReader::f32() { return std::bit_cast<float>(get_le<std::uint32_t>(*this)); }
double BinaryReader::f64() { return std::bit_cast<double>(get_le<std::uint64_t>(*this)); }

std::string BinaryReader::string(std::size_t max_size) {
  const auto size = u32();
  if (size > max_size) throw CorruptionError(context_ + ": string length " + std::to_string(size) + " too large");
  std::string s(size, '\0');
  bytes(s.data(), size);
  return s;
}

void write_tensor(BinaryWriter& out, const Tensor& tensor) {
  out.magic("TFTN");
  out.u16(kTensorFormatVersion);
  out.u16(static_cast<std::uint16_t>(tensor.rank()));
  for (auto extent : tensor.shape()) out.u64(static_cast<std::uint64_t>(extent));
  for (float v : tensor.values()) out.f32(v);
}

Tensor read_tensor(BinaryReader& in) {
  in.expect_magic("TFTN");
  const auto version = in.u16();
  if (version != kTensorFormatVersion) {
    throw CorruptionError(in.context() + ": unsupported tensor version " + std::to_string(version));
  }
  const auto rank = in.u16();
  if (rank == 0 || rank > 8) throw CorruptionError(in.context() + ": invalid tensor rank");
  Shape shape;
  std::uint64_t count = 1;
  for (std::uint16_t i = 0; i < rank; ++i) {
    const auto extent = in.u64();
    if (extent == 0 || extent > (1ULL << 32)) throw CorruptionError(in.context() + ": invalid tensor extent");
    count *= extent;
    if (count > (1ULL << 32)) throw CorruptionError(in.context() + ": tensor too large");
    shape.push_back(static_cast<std::int64_t>(extent));
  }
  std::vector<float> values(count);
  for (auto& v : values) v = in.f32();
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace terragan
