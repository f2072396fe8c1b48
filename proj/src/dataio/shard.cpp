#include "mixgen/dataio/shard.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "mixgen/dataio/image_io.hpp"

namespace mixgen::dataio {

std::string to_json_line(const ShardLine& line) {
  nlohmann::ordered_json obj;
  obj["id"] = line.id;
  obj["image"] = line.image;
  obj["text"] = line.text;
  obj["lambda"] = line.lambda ? nlohmann::ordered_json(*line.lambda) : nlohmann::ordered_json(nullptr);
  obj["variant"] = line.variant;
  obj["sources"] = line.sources;
  return obj.dump();
}

ShardLine parse_shard_line(const std::string& json_line) {
  try {
    const auto obj = nlohmann::json::parse(json_line);
    ShardLine line;
    line.id = obj.at("id").get<std::string>();
    line.image = obj.at("image").get<std::string>();
    line.text = obj.at("text").get<std::string>();
    if (!obj.at("lambda").is_null()) line.lambda = obj.at("lambda").get<double>();
    line.variant = obj.at("variant").get<std::string>();
    line.sources = obj.at("sources").get<std::vector<std::string>>();
    return line;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedLine, std::string("shard line: ") + e.what());
  }
}

ShardLine shard_line_for(const AugmentedPair& pair, std::string image_rel_path) {
  return {pair.pair.id, std::move(image_rel_path), pair.pair.text.raw(), pair.lambda_used,
          std::string(to_string(pair.variant_used)), pair.sources};
}

ShardLine shard_line_for(const ImageTextPair& pair, std::string image_rel_path) {
  return {pair.id, std::move(image_rel_path), pair.text.raw(), std::nullopt, "original", {pair.id}};
}

void prepare_output_dir(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / kShardImageDir, ec);
  if (ec) {
    throw Error(ErrorCode::DestinationUnwritable, out_dir.string() + ": " + ec.message());
  }
  // Probe write permission; create_directories succeeds on existing read-only dirs.
  const auto probe = out_dir / ".write_probe";
  {
    std::ofstream test(probe);
    if (!test) throw Error(ErrorCode::DestinationUnwritable, out_dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

std::filesystem::path write_shard(const std::vector<AugmentedPair>& pairs,
                                  const std::filesystem::path& out_dir) {
  prepare_output_dir(out_dir);
  const auto sidecar = out_dir / kShardManifestName;
  std::ofstream out(sidecar, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + sidecar.string());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.png", k);
    const std::string rel = std::string(kShardImageDir) + "/" + name;
    try {
      write_png(out_dir / rel, pairs[k].pair.image);
    } catch (const Error& e) {
      throw Error(e.code(), "pair '" + pairs[k].pair.id + "': " + e.what());
    }
    out << to_json_line(shard_line_for(pairs[k], rel)) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "short write to " + sidecar.string());
  return sidecar;
}

}  // namespace mixgen::dataio
