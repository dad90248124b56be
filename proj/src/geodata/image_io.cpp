#include "terragan/geodata/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "terragan/core/errors.hpp"

namespace terragan::geodata {

unsigned char to_byte(float value) {
  const double scaled = std::round((static_cast<double>(value) + 1.0) * 127.5);
  return static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
}

std::string encode_image(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw ShapeError("image must be [1,H,W] or [3,H,W], got " + shape_string(image.shape()));
  }
  const auto channels = image.dim(0);
  const auto h = image.dim(1);
  const auto w = image.dim(2);
  std::string out = (channels == 3 ? "P6\n" : "P5\n") + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const auto plane = static_cast<std::size_t>(h * w);
  out.reserve(out.size() + plane * static_cast<std::size_t>(channels));
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::int64_t c = 0; c < channels; ++c) {
      out.push_back(static_cast<char>(to_byte(image[static_cast<std::size_t>(c) * plane + p])));
    }
  }
  return out;
}

void write_image(const std::string& path, const Tensor& image) {
  const auto bytes = encode_image(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Tensor read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const auto start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  const auto magic = token();
  if (magic != "P5" && magic != "P6") throw ParseError(path + ": not a binary PGM/PPM");
  std::int64_t w = 0;
  std::int64_t h = 0;
  std::int64_t maxval = 0;
  try {
    w = std::stoll(token());
    h = std::stoll(token());
    maxval = std::stoll(token());
  } catch (const std::exception&) {
    throw ParseError(path + ": malformed image header");
  }
  if (w < 1 || h < 1 || maxval != 255) throw ParseError(path + ": unsupported image header");
  ++pos;  // single whitespace before the pixel data
  const std::int64_t channels = magic == "P6" ? 3 : 1;
  const auto plane = static_cast<std::size_t>(w * h);
  if (data.size() - pos != plane * static_cast<std::size_t>(channels)) {
    throw CorruptionError(path + ": pixel data length mismatch");
  }
  Tensor out({channels, h, w});
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const auto byte = static_cast<unsigned char>(data[pos + p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)]);
      out[static_cast<std::size_t>(c) * plane + p] = static_cast<float>(byte / 127.5 - 1.0);
    }
  }
  return out;
}

}  // namespace terragan::geodata
