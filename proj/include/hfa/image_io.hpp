#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hfa/common.hpp"

namespace hfa {

double srgb_to_linear(double v);
double linear_to_srgb(double v);
/// 8-bit sRGB code of a linear channel value.
int quantize_srgb8(double linear);

/// Decodes PNG or binary PPM (P6), converts sRGB to linear [0,1], center-crops non-square
/// images (a note is appended to `warnings`) and box-resamples to target_size x target_size.
/// target_size <= 0 keeps the decoded size.
Image load_image(const std::filesystem::path& path, int target_size = 0,
                 std::vector<std::string>* warnings = nullptr);

/// Area-weighted box resampling; integer factors average whole blocks.
Image resample_box(const Image& src, int size);

/// Writes 8-bit sRGB. The format follows the extension (.png or .ppm).
void save_image(const std::filesystem::path& path, const Image& image);
void save_png(const std::filesystem::path& path, const Image& image);
void save_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace hfa
