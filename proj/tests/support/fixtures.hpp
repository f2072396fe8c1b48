#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixgen/dataio/image_io.hpp"
#include "mixgen/dataio/manifest.hpp"
#include "mixgen/random.hpp"

namespace mixgen::testing {

class TempDir {
 public:
  TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "mixgen_test_XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Replays a fixed list of words, then throws.
class ScriptedStream final : public RandomStream {
 public:
  explicit ScriptedStream(std::vector<std::uint64_t> words) : words_(std::move(words)) {}
  std::uint64_t next_u64() override {
    if (pos_ >= words_.size()) throw std::out_of_range("scripted stream exhausted");
    return words_[pos_++];
  }
  std::size_t consumed() const { return pos_; }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t pos_ = 0;
};

/// Always returns the same word.
class ConstantStream final : public RandomStream {
 public:
  explicit ConstantStream(std::uint64_t word) : word_(word) {}
  std::uint64_t next_u64() override { return word_; }

 private:
  std::uint64_t word_;
};

inline dataio::Rgb8Image synthetic_rgb(std::size_t height, std::size_t width, std::size_t seed) {
  dataio::Rgb8Image img;
  img.height = height;
  img.width = width;
  img.pixels.resize(height * width * 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        img.pixels[(y * width + x) * 3 + c] =
            static_cast<std::uint8_t>((x * (c + 1) + 2 * y + 37 * seed + 80 * c) % 256);
      }
    }
  }
  return img;
}

struct SyntheticDataset {
  std::filesystem::path manifest;
  std::vector<dataio::ManifestRecord> records;
};

/// Writes `n_images` PNGs (or JPEGs) of height x width plus a manifest whose
/// records carry `captions_per_image` captions each.
inline SyntheticDataset write_synthetic_dataset(const std::filesystem::path& dir, std::size_t n_images,
                                                std::size_t captions_per_image, std::size_t height,
                                                std::size_t width, bool jpeg = false) {
  static const char* kWords[] = {"a", "dog", "cat", "on", "the", "grass", "red", "ball",
                                 "white", "sky", "two", "people", "near", "water", "small", "boat"};
  std::filesystem::create_directories(dir / "img");
  SyntheticDataset ds;
  for (std::size_t i = 0; i < n_images; ++i) {
    const auto img = synthetic_rgb(height, width, i);
    const std::string rel = "img/" + std::to_string(i) + (jpeg ? ".jpg" : ".png");
    dataio::write_file(dir / rel, jpeg ? dataio::encode_jpeg(img) : dataio::encode_png(img));
    dataio::ManifestRecord rec{"img" + std::to_string(i), rel, {}};
    for (std::size_t k = 0; k < captions_per_image; ++k) {
      std::string caption;
      for (std::size_t w = 0; w < 3 + (i + k) % 5; ++w) {
        if (!caption.empty()) caption += ' ';
        caption += kWords[(i * 7 + k * 3 + w * 5) % 16];
      }
      rec.captions.push_back(caption);
    }
    ds.records.push_back(std::move(rec));
  }
  ds.manifest = dir / "manifest.jsonl";
  dataio::write_manifest(ds.manifest, ds.records);
  return ds;
}

/// Builds an N x N score matrix (caption t belongs to image t) whose retrieval
/// recalls are exactly the requested hit counts. Entries are 0 on the
/// diagonal and +1/-1 elsewhere; a +1 at (i, j) pushes the ground truth of
/// row i and of column j down by one place, so rows and columns need a 0/1
/// matrix with prescribed margins, built greedily (largest demand first).
struct RetrievalFixture {
  std::size_t n = 0;
  std::vector<float> scores;
};

inline std::vector<std::size_t> bucket_ranks(std::size_t n, std::size_t at1, std::size_t at5, std::size_t at10) {
  std::vector<std::size_t> ranks;
  ranks.insert(ranks.end(), at1, 0);
  ranks.insert(ranks.end(), at5 - at1, 1);
  ranks.insert(ranks.end(), at10 - at5, 5);
  ranks.insert(ranks.end(), n - at10, 10);
  return ranks;
}

inline RetrievalFixture build_retrieval_fixture(std::size_t n, const std::size_t tr_hits[3],
                                                const std::size_t ir_hits[3]) {
  auto rows = bucket_ranks(n, tr_hits[0], tr_hits[1], tr_hits[2]);
  auto cols = bucket_ranks(n, ir_hits[0], ir_hits[1], ir_hits[2]);
  // Balance the margins by raising the "beyond 10" entries of the lighter side.
  auto total = [](const std::vector<std::size_t>& v) { return std::accumulate(v.begin(), v.end(), std::size_t{0}); };
  auto top_up = [](std::vector<std::size_t>& v, std::size_t extra) {
    std::vector<std::size_t*> big;
    for (auto& r : v) if (r >= 10) big.push_back(&r);
    if (big.empty() && extra) throw std::runtime_error("fixture needs a miss bucket");
    for (std::size_t k = 0; k < extra; ++k) ++*big[k % big.size()];
  };
  const auto tr_total = total(rows), ir_total = total(cols);
  if (tr_total < ir_total) top_up(rows, ir_total - tr_total);
  else top_up(cols, tr_total - ir_total);

  // The diagonal is excluded, so greedy filling can strand a row whose only
  // open column is its own. Rotating the column demands against the rows
  // avoids that; try rotations until one fills.
  std::vector<std::vector<char>> ones;
  bool filled = false;
  for (std::size_t shift = 0; shift < n && !filled; ++shift) {
    ones.assign(n, std::vector<char>(n, 0));
    std::vector<std::size_t> remaining(n);
    for (std::size_t j = 0; j < n; ++j) remaining[j] = cols[(j + shift) % n];
    std::vector<std::size_t> row_order(n);
    std::iota(row_order.begin(), row_order.end(), 0);
    std::stable_sort(row_order.begin(), row_order.end(), [&](auto a, auto b) { return rows[a] > rows[b]; });
    filled = true;
    for (auto i : row_order) {
      std::vector<std::size_t> cand;
      for (std::size_t j = 0; j < n; ++j) if (j != i && remaining[j] > 0) cand.push_back(j);
      std::stable_sort(cand.begin(), cand.end(), [&](auto a, auto b) { return remaining[a] > remaining[b]; });
      if (cand.size() < rows[i]) {
        filled = false;
        break;
      }
      for (std::size_t k = 0; k < rows[i]; ++k) {
        ones[i][cand[k]] = 1;
        --remaining[cand[k]];
      }
    }
    if (filled && std::any_of(remaining.begin(), remaining.end(), [](auto r) { return r != 0; })) filled = false;
  }
  if (!filled) throw std::runtime_error("retrieval fixture infeasible");
  RetrievalFixture fx;
  fx.n = n;
  fx.scores.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) fx.scores[i * n + j] = i == j ? 0.0f : (ones[i][j] ? 1.0f : -1.0f);
  }
  return fx;
}

}  // namespace mixgen::testing
