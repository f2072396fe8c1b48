#include "mixgen/dataio/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <string>

#include "mixgen/dataio/image_io.hpp"

namespace mixgen::dataio {

namespace {

constexpr std::uint8_t kMagic[4] = {'M', 'X', 'T', 'N'};
constexpr std::size_t kFixedHeader = 7;

void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims, std::span<const float> data) {
  if (dims.size() > 255) throw Error(ErrorCode::LengthMismatch, "rank above 255");
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != data.size()) {
    throw Error(ErrorCode::LengthMismatch, "dims describe " + std::to_string(count) +
                                               " values, got " + std::to_string(data.size()));
  }
  const std::size_t offset = kFixedHeader + 8 * dims.size();
  std::vector<std::uint8_t> out(offset + 4 * data.size());
  std::memcpy(out.data(), kMagic, 4);
  out[4] = kTensorVersion;
  out[5] = kDtypeFloat32;
  out[6] = static_cast<std::uint8_t>(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) put_u64(out.data() + kFixedHeader + 8 * k, dims[k]);
  if constexpr (std::endian::native == std::endian::little) {
    if (!data.empty()) std::memcpy(out.data() + offset, data.data(), 4 * data.size());
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(data[i]);
      for (int b = 0; b < 4; ++b) out[offset + 4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not an MXTN tensor file");
  }
  if (bytes.size() < kFixedHeader) throw Error(ErrorCode::LengthMismatch, "truncated header");
  if (bytes[4] != kTensorVersion) {
    throw Error(ErrorCode::UnsupportedFormat, "tensor file version " + std::to_string(bytes[4]));
  }
  if (bytes[5] != kDtypeFloat32) {
    throw Error(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(bytes[5]));
  }
  const std::size_t rank = bytes[6];
  if (bytes.size() < kFixedHeader + 8 * rank) throw Error(ErrorCode::LengthMismatch, "truncated dims");

  Tensor t;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint64_t d = get_u64(bytes.data() + kFixedHeader + 8 * i);
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
      throw Error(ErrorCode::LengthMismatch, "dims overflow");
    }
    count *= d;
    t.dims.push_back(d);
  }
  const std::size_t offset = kFixedHeader + 8 * rank;
  const std::size_t payload = bytes.size() - offset;
  if (payload != count * 4) {
    throw Error(ErrorCode::LengthMismatch, "header expects " + std::to_string(count * 4) +
                                               " payload bytes, found " + std::to_string(payload));
  }
  t.data.resize(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (count) std::memcpy(t.data.data(), bytes.data() + offset, payload);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) bits = (bits << 8) | bytes[offset + 4 * i + b];
      t.data[i] = std::bit_cast<float>(bits);
    }
  }
  return t;
}

void write_tensor_file(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                       std::span<const float> data) {
  write_file(path, encode_tensor(dims, data));
}

Tensor read_tensor_file(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

FeatureMatrix read_tensor(const std::filesystem::path& path) {
  auto t = read_tensor_file(path);
  if (t.dims.size() != 2) {
    throw Error(ErrorCode::DimMismatch, path.string() + ": expected rank 2, got rank " +
                                            std::to_string(t.dims.size()));
  }
  return FeatureMatrix(t.dims[0], t.dims[1], std::move(t.data));
}

void write_tensor(const FeatureMatrix& m, const std::filesystem::path& path) {
  const std::uint64_t dims[] = {m.rows(), m.cols()};
  write_tensor_file(path, dims, m.data());
}

}  // namespace mixgen::dataio
