#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixgen/core_types.hpp"

namespace mixgen::dataio {

inline constexpr const char* kShardManifestName = "shard.jsonl";
inline constexpr const char* kShardImageDir = "images";

/// One line of a shard sidecar. Pairs that were not regenerated carry no
/// lambda, variant "original" and a single source.
struct ShardLine {
  std::string id;
  std::string image;  // relative to the shard directory
  std::string text;
  std::optional<double> lambda;
  std::string variant;
  std::vector<std::string> sources;

  friend bool operator==(const ShardLine&, const ShardLine&) = default;
};

/// {"id","image","text","lambda","variant","sources"}, keys in that order.
std::string to_json_line(const ShardLine& line);
ShardLine parse_shard_line(const std::string& json_line);

ShardLine shard_line_for(const AugmentedPair& pair, std::string image_rel_path);
ShardLine shard_line_for(const ImageTextPair& pair, std::string image_rel_path);

/// Writes every image as PNG under out_dir/images/ (000000.png, ...) and one
/// JSONL line per pair to out_dir/shard.jsonl in pair order. Returns the
/// sidecar path. Errors name the offending pair id.
std::filesystem::path write_shard(const std::vector<AugmentedPair>& pairs,
                                  const std::filesystem::path& out_dir);

/// Creates the directory (and images/ under it); throws DestinationUnwritable.
void prepare_output_dir(const std::filesystem::path& out_dir);

}  // namespace mixgen::dataio
