#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mixgen/dataio/manifest.hpp"

namespace mixgen::dataio {

struct SourceStats {
  std::string source;
  std::size_t num_images = 0;
  std::size_t num_texts = 0;
};

struct DatasetStats {
  std::size_t num_images = 0;
  std::size_t num_texts = 0;
  std::vector<SourceStats> per_source;
};

struct TaggedManifest {
  std::string source;
  std::vector<ManifestRecord> records;
};

DatasetStats compute_stats(const std::vector<ManifestRecord>& records, const std::string& source = "all");
/// Per-source rows plus their sum.
DatasetStats compute_stats(const std::vector<TaggedManifest>& sources);

/// {"num_images","num_texts","per_source":[{"source","num_images","num_texts"},...]}
std::string to_json(const DatasetStats& stats);

}  // namespace mixgen::dataio
