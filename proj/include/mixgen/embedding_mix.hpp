#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixgen/error.hpp"

namespace mixgen {

/// Row-major L x D float matrix of encoder features. Values are unbounded.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws DimMismatch unless rows, cols >= 1 and data.size() == rows * cols.
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t r) const noexcept {
    return std::span<const float>(data_).subspan(r * cols_, cols_);
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// Elementwise lambda * fa + (1 - lambda) * fb; no range clamp.
/// Throws ShapeMismatch or InvalidLambda.
FeatureMatrix mix_image_embeddings(const FeatureMatrix& fa, const FeatureMatrix& fb, double lambda);

/// Stacks fb's rows under fa's. Throws DimMismatch if the column counts differ.
FeatureMatrix concat_text_embeddings(const FeatureMatrix& fa, const FeatureMatrix& fb);

}  // namespace mixgen
