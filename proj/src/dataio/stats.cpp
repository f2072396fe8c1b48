#include "mixgen/dataio/stats.hpp"

#include "json.hpp"

namespace mixgen::dataio {

DatasetStats compute_stats(const std::vector<ManifestRecord>& records, const std::string& source) {
  return compute_stats(std::vector<TaggedManifest>{{source, records}});
}

DatasetStats compute_stats(const std::vector<TaggedManifest>& sources) {
  DatasetStats stats;
  for (const auto& src : sources) {
    SourceStats row{src.source, src.records.size(), 0};
    for (const auto& r : src.records) row.num_texts += r.captions.size();
    stats.num_images += row.num_images;
    stats.num_texts += row.num_texts;
    stats.per_source.push_back(std::move(row));
  }
  return stats;
}

std::string to_json(const DatasetStats& stats) {
  nlohmann::ordered_json obj;
  obj["num_images"] = stats.num_images;
  obj["num_texts"] = stats.num_texts;
  obj["per_source"] = nlohmann::ordered_json::array();
  for (const auto& row : stats.per_source) {
    nlohmann::ordered_json r;
    r["source"] = row.source;
    r["num_images"] = row.num_images;
    r["num_texts"] = row.num_texts;
    obj["per_source"].push_back(std::move(r));
  }
  return obj.dump();
}

}  // namespace mixgen::dataio
