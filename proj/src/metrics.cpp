#include "mixgen/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace mixgen::metrics {

namespace {
[[noreturn]] void inconsistent(const std::string& why) {
  throw Error(ErrorCode::InconsistentGroundTruth, why);
}
}  // namespace

ScoreMatrix::ScoreMatrix(std::size_t n_images, std::size_t n_texts, std::vector<float> scores)
    : n_images_(n_images), n_texts_(n_texts), scores_(std::move(scores)) {
  if (n_images_ == 0 || n_texts_ == 0) inconsistent("score matrix must be non-empty");
  if (scores_.size() != n_images_ * n_texts_) {
    inconsistent("expected " + std::to_string(n_images_ * n_texts_) + " scores, got " +
                 std::to_string(scores_.size()));
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (!std::isfinite(scores_[i])) inconsistent("score " + std::to_string(i) + " is not finite");
  }
}

GroundTruth GroundTruth::from_image_to_texts(std::vector<std::vector<std::size_t>> image_to_texts,
                                             std::size_t n_texts) {
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> text_to_image(n_texts, kUnset);
  for (std::size_t i = 0; i < image_to_texts.size(); ++i) {
    if (image_to_texts[i].empty()) inconsistent("image " + std::to_string(i) + " has no captions");
    for (std::size_t t : image_to_texts[i]) {
      if (t >= n_texts) inconsistent("text index " + std::to_string(t) + " out of range");
      if (text_to_image[t] != kUnset) inconsistent("text " + std::to_string(t) + " has two images");
      text_to_image[t] = i;
    }
  }
  for (std::size_t t = 0; t < n_texts; ++t) {
    if (text_to_image[t] == kUnset) inconsistent("text " + std::to_string(t) + " has no image");
  }
  GroundTruth gt;
  gt.image_to_texts_ = std::move(image_to_texts);
  gt.text_to_image_ = std::move(text_to_image);
  return gt;
}

GroundTruth GroundTruth::create(std::vector<std::vector<std::size_t>> image_to_texts,
                                std::vector<std::size_t> text_to_image) {
  auto gt = from_image_to_texts(std::move(image_to_texts), text_to_image.size());
  if (gt.text_to_image_ != text_to_image) inconsistent("text_to_image is not the inverse of image_to_texts");
  return gt;
}

std::vector<std::size_t> ground_truth_ranks(const ScoreMatrix& scores, const GroundTruth& gt,
                                            Direction direction) {
  if (gt.n_images() != scores.n_images() || gt.n_texts() != scores.n_texts()) {
    inconsistent("ground truth is " + std::to_string(gt.n_images()) + "x" + std::to_string(gt.n_texts()) +
                 ", scores are " + std::to_string(scores.n_images()) + "x" + std::to_string(scores.n_texts()));
  }
  // Candidate c outranks target g iff s[c] > s[g], or s[c] == s[g] and c < g.
  auto rank_of = [](std::size_t n, std::size_t target, auto score) {
    const float s = score(target);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n; ++c) {
      const float v = score(c);
      rank += (v > s) || (v == s && c < target);
    }
    return rank;
  };

  std::vector<std::size_t> ranks;
  if (direction == Direction::ImageToText) {
    ranks.reserve(scores.n_images());
    for (std::size_t i = 0; i < scores.n_images(); ++i) {
      auto score = [&](std::size_t t) { return scores.at(i, t); };
      // The best-placed caption is the highest scoring one, lowest index on ties.
      std::size_t best = gt.texts_of(i).front();
      for (std::size_t t : gt.texts_of(i)) {
        if (score(t) > score(best) || (score(t) == score(best) && t < best)) best = t;
      }
      ranks.push_back(rank_of(scores.n_texts(), best, score));
    }
  } else {
    ranks.reserve(scores.n_texts());
    for (std::size_t t = 0; t < scores.n_texts(); ++t) {
      auto score = [&](std::size_t i) { return scores.at(i, t); };
      ranks.push_back(rank_of(scores.n_images(), gt.image_of(t), score));
    }
  }
  return ranks;
}

namespace {
double percent_within(const std::vector<std::size_t>& ranks, std::size_t k) {
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r < k; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}
}  // namespace

double recall_at_k(const ScoreMatrix& scores, const GroundTruth& gt, std::size_t k, Direction direction) {
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "k must be at least 1");
  return percent_within(ground_truth_ranks(scores, gt, direction), k);
}

double exact_sum(std::span<const double> values) {
  // Shewchuk's non-overlapping partials with a final half-way correction.
  std::vector<double> partials;
  for (double x : values) {
    std::size_t used = 0;
    for (double y : partials) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[used++] = lo;
      x = hi;
    }
    partials.resize(used);
    partials.push_back(x);
  }
  std::size_t n = partials.size();
  if (n == 0) return 0.0;
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

double rsum(double tr_r1, double tr_r5, double tr_r10, double ir_r1, double ir_r5, double ir_r10) {
  const double values[] = {tr_r1, tr_r5, tr_r10, ir_r1, ir_r5, ir_r10};
  return exact_sum(values);
}

RetrievalReport evaluate_retrieval(const ScoreMatrix& scores, const GroundTruth& gt) {
  const auto tr = ground_truth_ranks(scores, gt, Direction::ImageToText);
  const auto ir = ground_truth_ranks(scores, gt, Direction::TextToImage);
  RetrievalReport r;
  r.tr_r1 = percent_within(tr, 1);
  r.tr_r5 = percent_within(tr, 5);
  r.tr_r10 = percent_within(tr, 10);
  r.ir_r1 = percent_within(ir, 1);
  r.ir_r5 = percent_within(ir, 5);
  r.ir_r10 = percent_within(ir, 10);
  r.rsum = rsum(r.tr_r1, r.tr_r5, r.tr_r10, r.ir_r1, r.ir_r5, r.ir_r10);
  return r;
}

std::string to_json(const RetrievalReport& report) {
  nlohmann::ordered_json obj;
  obj["tr_r1"] = report.tr_r1;
  obj["tr_r5"] = report.tr_r5;
  obj["tr_r10"] = report.tr_r10;
  obj["ir_r1"] = report.ir_r1;
  obj["ir_r5"] = report.ir_r5;
  obj["ir_r10"] = report.ir_r10;
  obj["rsum"] = report.rsum;
  return obj.dump();
}

}  // namespace mixgen::metrics
