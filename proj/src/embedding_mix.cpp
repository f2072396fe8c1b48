#include "mixgen/embedding_mix.hpp"

#include <string>

#include "mixgen/detail/lerp.hpp"

namespace mixgen {

namespace {
std::string shape_str(const FeatureMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) throw Error(ErrorCode::DimMismatch, "feature matrix must be non-empty");
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimMismatch, "expected " + std::to_string(rows_ * cols_) +
                                            " values, got " + std::to_string(data_.size()));
  }
}

FeatureMatrix mix_image_embeddings(const FeatureMatrix& fa, const FeatureMatrix& fb, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidLambda, "lambda " + std::to_string(lambda) + " outside [0,1]");
  }
  if (fa.rows() != fb.rows() || fa.cols() != fb.cols()) {
    throw Error(ErrorCode::ShapeMismatch, shape_str(fa) + " vs " + shape_str(fb));
  }
  if (lambda == 1.0) return fa;
  if (lambda == 0.0) return fb;
  std::vector<float> out(fa.data().size());
  detail::lerp(fa.data(), fb.data(), static_cast<float>(lambda), out);
  return FeatureMatrix(fa.rows(), fa.cols(), std::move(out));
}

FeatureMatrix concat_text_embeddings(const FeatureMatrix& fa, const FeatureMatrix& fb) {
  if (fa.cols() != fb.cols()) {
    throw Error(ErrorCode::DimMismatch, shape_str(fa) + " and " + shape_str(fb) +
                                            " have different feature dimensions");
  }
  std::vector<float> out;
  out.reserve(fa.data().size() + fb.data().size());
  out.insert(out.end(), fa.data().begin(), fa.data().end());
  out.insert(out.end(), fb.data().begin(), fb.data().end());
  return FeatureMatrix(fa.rows() + fb.rows(), fa.cols(), std::move(out));
}

}  // namespace mixgen
