#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mixgen/embedding_mix.hpp"

namespace mixgen::dataio {

// Layout, all integers little-endian:
//   "MXTN" | version u8 (=1) | dtype u8 (0 = float32) | rank u8 |
//   rank x u64 dims | prod(dims) x f32 payload, row-major.
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> data;
};

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims, std::span<const float> data);
/// Throws BadMagic, UnsupportedDtype or LengthMismatch.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor_file(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                       std::span<const float> data);
Tensor read_tensor_file(const std::filesystem::path& path);

/// Rank-2 view of the format; other ranks throw DimMismatch.
FeatureMatrix read_tensor(const std::filesystem::path& path);
void write_tensor(const FeatureMatrix& m, const std::filesystem::path& path);

}  // namespace mixgen::dataio
