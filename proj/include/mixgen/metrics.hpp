#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mixgen/error.hpp"

namespace mixgen::metrics {

/// Image-major similarity matrix: at(i, t) scores image i against text t.
class ScoreMatrix {
 public:
  /// Throws InconsistentGroundTruth on a size mismatch or non-finite score.
  ScoreMatrix(std::size_t n_images, std::size_t n_texts, std::vector<float> scores);

  std::size_t n_images() const noexcept { return n_images_; }
  std::size_t n_texts() const noexcept { return n_texts_; }
  float at(std::size_t image, std::size_t text) const noexcept { return scores_[image * n_texts_ + text]; }
  std::span<const float> data() const noexcept { return scores_; }

 private:
  std::size_t n_images_;
  std::size_t n_texts_;
  std::vector<float> scores_;
};

/// Caption ownership: every text belongs to exactly one image, every image
/// owns at least one text.
class GroundTruth {
 public:
  /// Throws InconsistentGroundTruth unless the lists partition 0..n_texts-1.
  static GroundTruth from_image_to_texts(std::vector<std::vector<std::size_t>> image_to_texts,
                                         std::size_t n_texts);
  /// Also checks that `text_to_image` is the inverse of `image_to_texts`.
  static GroundTruth create(std::vector<std::vector<std::size_t>> image_to_texts,
                            std::vector<std::size_t> text_to_image);

  std::size_t n_images() const noexcept { return image_to_texts_.size(); }
  std::size_t n_texts() const noexcept { return text_to_image_.size(); }
  const std::vector<std::size_t>& texts_of(std::size_t image) const { return image_to_texts_[image]; }
  std::size_t image_of(std::size_t text) const { return text_to_image_[text]; }

 private:
  std::vector<std::vector<std::size_t>> image_to_texts_;
  std::vector<std::size_t> text_to_image_;
};

enum class Direction {
  ImageToText,  // text retrieval: image queries rank all texts
  TextToImage,  // image retrieval: text queries rank all images
};

/// 0-based rank of the best ground-truth candidate for every query. Candidates
/// are ordered by descending score, ties by ascending index.
std::vector<std::size_t> ground_truth_ranks(const ScoreMatrix& scores, const GroundTruth& gt,
                                            Direction direction);

/// Percentage of queries whose ground truth ranks within the top k.
double recall_at_k(const ScoreMatrix& scores, const GroundTruth& gt, std::size_t k, Direction direction);

/// Correctly rounded sum (the exact sum of the inputs, rounded once).
double exact_sum(std::span<const double> values);

struct RetrievalReport {
  double tr_r1 = 0, tr_r5 = 0, tr_r10 = 0;
  double ir_r1 = 0, ir_r5 = 0, ir_r10 = 0;
  double rsum = 0;
};

/// Sum of the six recalls.
double rsum(double tr_r1, double tr_r5, double tr_r10, double ir_r1, double ir_r5, double ir_r10);

RetrievalReport evaluate_retrieval(const ScoreMatrix& scores, const GroundTruth& gt);

std::string to_json(const RetrievalReport& report);

}  // namespace mixgen::metrics
