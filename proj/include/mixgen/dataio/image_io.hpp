#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mixgen/core_types.hpp"

namespace mixgen::dataio {

/// Interleaved 8-bit RGB.
struct Rgb8Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

enum class ImageFormat { Png, Jpeg, Unknown };

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept;

/// Decodes PNG or JPEG bytes to RGB. Grayscale is replicated to three
/// channels; alpha is dropped. `context` (usually the path) prefixes error
/// messages. Throws DecodeError or UnsupportedFormat.
Rgb8Image decode_image(std::span<const std::uint8_t> bytes, const std::string& context);

/// Bytes to floats in [0, 1] without resizing.
ImageTensor to_tensor(const Rgb8Image& image);

/// Bilinear resize with half-pixel centers and edge clamping, no antialias
/// prefilter. Same-size input is returned unchanged.
ImageTensor resize_bilinear(const ImageTensor& src, std::size_t height, std::size_t width);

/// Decode, convert to three channels, resize to target, normalize.
ImageTensor load_image(const std::filesystem::path& path, std::size_t target_height,
                       std::size_t target_width);

/// round-half-up of v * 255.
inline std::uint8_t quantize(float v) noexcept {
  const double scaled = static_cast<double>(v) * 255.0 + 0.5;
  if (!(scaled > 0.0)) return 0;
  if (scaled >= 255.0) return 255;
  return static_cast<std::uint8_t>(scaled);
}

Rgb8Image quantize(const ImageTensor& image);

std::vector<std::uint8_t> encode_png(const Rgb8Image& image);
std::vector<std::uint8_t> encode_jpeg(const Rgb8Image& image, int quality = 90);

/// Quantizes and writes an 8-bit RGB PNG.
void write_png(const std::filesystem::path& path, const ImageTensor& image);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace mixgen::dataio
