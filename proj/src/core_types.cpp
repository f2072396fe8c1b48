#include "mixgen/core_types.hpp"

#include <algorithm>
#include <cmath>

namespace mixgen {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidLambda: return "InvalidLambda";
    case ErrorCode::InvalidMRatio: return "InvalidMRatio";
    case ErrorCode::InvalidBetaParams: return "InvalidBetaParams";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SelfMix: return "SelfMix";
    case ErrorCode::MTooLarge: return "MTooLarge";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DestinationUnwritable: return "DestinationUnwritable";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InconsistentGroundTruth: return "InconsistentGroundTruth";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

ImageTensor ImageTensor::create(std::size_t height, std::size_t width, std::vector<float> data) {
  if (height == 0 || width == 0) {
    throw Error(ErrorCode::InvalidImage, "image dimensions must be positive");
  }
  if (data.size() != height * width * kChannels) {
    throw Error(ErrorCode::InvalidImage,
                "expected " + std::to_string(height * width * kChannels) + " samples, got " +
                    std::to_string(data.size()));
  }
  // The negated comparison also rejects NaN.
  const auto bad = std::find_if(data.begin(), data.end(),
                                [](float v) { return !(v >= 0.0f && v <= 1.0f); });
  if (bad != data.end()) {
    throw Error(ErrorCode::InvalidImage,
                "sample " + std::to_string(bad - data.begin()) + " outside [0,1]");
  }
  return ImageTensor(Unchecked{}, height, width, std::move(data));
}

ImageTensor ImageTensor::filled(std::size_t height, std::size_t width, float value) {
  return create(height, width, std::vector<float>(height * width * kChannels, value));
}

namespace {
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::vector<std::string> whitespace_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

TextSequence TextSequence::from_tokens(std::span<const std::string> tokens) {
  std::string joined;
  for (const auto& t : tokens) {
    if (t.empty()) continue;
    if (!joined.empty()) joined.push_back(' ');
    joined += t;
  }
  TextSequence seq;
  seq.raw_ = std::move(joined);
  return seq;
}

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Default: return "default";
    case Variant::A: return "a";
    case Variant::B: return "b";
    case Variant::C: return "c";
    case Variant::D: return "d";
    case Variant::E: return "e";
  }
  return "default";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept {
  for (Variant v : {Variant::Default, Variant::A, Variant::B, Variant::C, Variant::D, Variant::E}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

MixGenConfig validate_config(MixGenConfig config) {
  if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda_policy)) {
    if (!(fixed->value >= 0.0 && fixed->value <= 1.0)) {
      throw Error(ErrorCode::InvalidLambda,
                  "lambda " + std::to_string(fixed->value) + " outside [0,1]");
    }
  } else {
    const auto& beta = std::get<BetaLambda>(config.lambda_policy);
    if (!(beta.alpha > 0.0 && beta.beta > 0.0) || !std::isfinite(beta.alpha) ||
        !std::isfinite(beta.beta)) {
      throw Error(ErrorCode::InvalidBetaParams, "Beta shape parameters must be positive");
    }
  }
  if (const auto* frac = std::get_if<MFraction>(&config.m_policy)) {
    if (!(frac->fraction >= 0.0 && frac->fraction <= 0.5)) {
      throw Error(ErrorCode::InvalidMRatio,
                  "M fraction " + std::to_string(frac->fraction) + " outside [0,0.5]");
    }
  }
  if (config.target_height == 0 || config.target_width == 0) {
    throw Error(ErrorCode::InvalidConfig, "resize target must be positive");
  }
  if (config.max_tokens && *config.max_tokens == 0) {
    throw Error(ErrorCode::InvalidConfig, "max_tokens must be positive");
  }
  return config;
}

}  // namespace mixgen
