#pragma once

#include <filesystem>

#include "sigsal/tensor.hpp"

namespace sigsal {

// Binary PGM (P5, maxval 255) -> rank-2 tensor of p/255.
Tensor read_gray_image(const std::filesystem::path& path);

// Values are clamped to [0,1] and quantized as floor(255*v + 0.5).
void write_gray_image(const Tensor& img, const std::filesystem::path& path);

// rgb has shape [h, w, 3] with values in [0,1]; written as binary PPM (P6).
void write_rgb_image(const Tensor& rgb, const std::filesystem::path& path);

unsigned char quantize_unit(double v);

}  // namespace sigsal
