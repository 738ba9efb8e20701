#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "lowlight/image.hpp"

namespace lowlight {

enum class ImageFormat { png8, ppm };

/// 8-bit sample for an intensity: round(clamp(v, 0, 1) * 255), halves away
/// from zero.
std::uint8_t quantize(float v) noexcept;

/// Decodes 8-bit PNG (gray or RGB) or binary PGM (P5) / PPM (P6) with maxval
/// 255. The format is detected from the leading magic bytes.
Image decode_image(std::span<const std::uint8_t> bytes);

/// Encodes as PNG or as binary PNM (P5 for 1 channel, P6 for 3). Output bytes
/// depend only on the image contents.
std::vector<std::uint8_t> encode_image(const Image& img, ImageFormat format);

/// ".png" selects png8; ".ppm", ".pgm" and ".pnm" select ppm. Anything else is
/// a parameter error.
ImageFormat format_for_path(const std::filesystem::path& path);

Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);
void write_image(const std::filesystem::path& path, const Image& img, ImageFormat format);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lowlight
