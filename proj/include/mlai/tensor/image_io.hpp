#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlai/tensor/image.hpp"

namespace mlai {

// Raw image container (".mimg"):
//   bytes 0..7   magic "MLAIIMG1"
//   bytes 8..11  header length L, uint32 little-endian
//   next L bytes JSON header {"height":H,"width":W,"channels":C,"dtype":"<f8"}
//   then H*W*C IEEE-754 doubles, little-endian, row-major (y, x, channel)
// The round trip is bit-exact.

std::vector<std::uint8_t> encode_raw(const Image& image);
Image decode_raw(const std::vector<std::uint8_t>& bytes);
void save_raw(const Image& image, const std::filesystem::path& path);
Image load_raw(const std::filesystem::path& path);

// PNG export quantizes each value to round(v * 255) (8 bits per channel), so a
// PNG round trip is lossy with error <= 0.5/255. 1, 3 or 4 channels.
std::vector<std::uint8_t> encode_png(const Image& image);
/// Decodes gray, gray+alpha, RGB or RGBA; alpha is dropped.
Image decode_png(const std::vector<std::uint8_t>& bytes);
void save_png(const Image& image, const std::filesystem::path& path);

/// Nearest-neighbour resample to a target shape (channel count must be 1 or 3
/// on either side; gray<->RGB is replicated or averaged).
Image resample_nearest(const Image& image, const Shape& target);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace mlai
