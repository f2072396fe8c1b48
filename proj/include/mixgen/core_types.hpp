#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mixgen/error.hpp"

namespace mixgen {

/// Decoded image, HWC row-major, three channels, every sample in [0, 1].
///
/// Instances built through `create` or `filled` always satisfy the shape and
/// range invariants. Kernels that can prove their output is in range use the
/// `Unchecked` constructor to skip the validation pass.
class ImageTensor {
 public:
  static constexpr std::size_t kChannels = 3;

  struct Unchecked {};

  ImageTensor() = default;
  ImageTensor(Unchecked, std::size_t height, std::size_t width, std::vector<float> data)
      : height_(height), width_(width), data_(std::move(data)) {}

  static ImageTensor create(std::size_t height, std::size_t width, std::vector<float> data);
  static ImageTensor filled(std::size_t height, std::size_t width, float value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return kChannels; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * kChannels + c];
  }

  bool same_shape(const ImageTensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Splits on runs of ASCII whitespace.
std::vector<std::string> whitespace_tokenize(std::string_view text);

/// Collapses whitespace runs to single spaces and trims both ends.
std::string normalize_text(std::string_view raw);

/// A caption in normalized form.
class TextSequence {
 public:
  TextSequence() = default;
  explicit TextSequence(std::string_view raw) : raw_(normalize_text(raw)) {}

  /// Joins tokens with single spaces. Tokens are assumed whitespace-free.
  static TextSequence from_tokens(std::span<const std::string> tokens);

  const std::string& raw() const noexcept { return raw_; }
  bool empty() const noexcept { return raw_.empty(); }
  std::vector<std::string> tokens(const Tokenizer& tokenizer = whitespace_tokenize) const {
    return tokenizer(raw_);
  }

  friend bool operator==(const TextSequence&, const TextSequence&) = default;

 private:
  std::string raw_;
};

struct ImageTextPair {
  std::string id;
  ImageTensor image;
  TextSequence text;
};

enum class Variant { Default, A, B, C, D, E };

std::string_view to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view name) noexcept;

struct AugmentedPair {
  ImageTextPair pair;
  std::vector<std::string> sources;  // exactly two: [i, j]
  double lambda_used = 0.5;
  Variant variant_used = Variant::Default;
};

struct Batch {
  std::vector<ImageTextPair> pairs;
  std::size_t size() const noexcept { return pairs.size(); }
};

struct FixedLambda {
  double value = 0.5;
};
struct BetaLambda {
  double alpha = 0.1;
  double beta = 0.1;
};
using LambdaPolicy = std::variant<FixedLambda, BetaLambda>;

struct MFraction {
  double fraction = 0.25;
};
struct MAbsolute {
  std::size_t m = 0;
};
using MPolicy = std::variant<MFraction, MAbsolute>;

struct MixGenConfig {
  LambdaPolicy lambda_policy = FixedLambda{0.5};
  MPolicy m_policy = MFraction{0.25};
  Variant variant = Variant::Default;
  std::uint64_t seed = 0;
  std::size_t target_height = 256;
  std::size_t target_width = 256;
  std::optional<std::size_t> max_tokens;
};

/// Returns `config` unchanged or throws InvalidLambda / InvalidMRatio /
/// InvalidBetaParams (InvalidConfig for a zero resize target or token cap).
MixGenConfig validate_config(MixGenConfig config);

}  // namespace mixgen
