#pragma once

#include <string>

#include "terragan/core/tensor.hpp"

namespace terragan::geodata {

/// [-1, 1] -> [0, 255], rounded and clamped.
unsigned char to_byte(float value);

/// Binary PPM (P6) from [3, H, W] or PGM (P5) from [1, H, W], values in [-1, 1].
void write_image(const std::string& path, const Tensor& image);
std::string encode_image(const Tensor& image);
/// Reads P5/P6 back into [-1, 1].
Tensor read_image(const std::string& path);

}  // namespace terragan::geodata
