#include "mixgen/dataio/manifest.hpp"

#include <fstream>
#include <istream>
#include "json.hpp"
#include <ostream>
#include <unordered_set>

#include "mixgen/random.hpp"

namespace mixgen::dataio {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

ManifestRecord parse_line(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    malformed(line_no, e.what());
  }
  if (!obj.is_object()) malformed(line_no, "expected a JSON object");

  ManifestRecord rec;
  const auto id = obj.find("id");
  if (id == obj.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
    malformed(line_no, "\"id\" must be a non-empty string");
  }
  rec.id = id->get<std::string>();

  const auto image = obj.find("image");
  if (image == obj.end() || !image->is_string() || image->get_ref<const std::string&>().empty()) {
    malformed(line_no, "\"image\" must be a non-empty string");
  }
  rec.image = image->get<std::string>();

  const auto captions = obj.find("captions");
  if (captions == obj.end() || !captions->is_array() || captions->empty()) {
    malformed(line_no, "\"captions\" must be a non-empty array");
  }
  for (const auto& c : *captions) {
    if (!c.is_string()) malformed(line_no, "captions must be strings");
    rec.captions.push_back(c.get<std::string>());
  }
  return rec;
}

}  // namespace

std::vector<ManifestRecord> parse_manifest(std::istream& in) {
  std::vector<ManifestRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto rec = parse_line(line, line_no);
    if (!seen.insert(rec.id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "id '" + rec.id + "' repeated on line " + std::to_string(line_no));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + path.string());
  try {
    return parse_manifest(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string to_json_line(const ManifestRecord& record) {
  nlohmann::ordered_json obj;
  obj["id"] = record.id;
  obj["image"] = record.image;
  obj["captions"] = record.captions;
  return obj.dump();
}

void write_manifest(std::ostream& out, const std::vector<ManifestRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest " + path.string());
  write_manifest(out, records);
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::vector<PairRef> expand_pairs(const std::vector<ManifestRecord>& records) {
  std::vector<PairRef> pairs;
  std::size_t total = 0;
  for (const auto& r : records) total += r.captions.size();
  pairs.reserve(total);
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.captions.size(); ++k) {
      pairs.push_back({r.id + "#" + std::to_string(k), r.image, TextSequence(r.captions[k])});
    }
  }
  return pairs;
}

bool is_remote(const std::string& image) {
  return image.starts_with("http://") || image.starts_with("https://");
}

std::string resolve_image(const std::string& image, const std::filesystem::path& base_dir) {
  if (is_remote(image)) return image;
  const std::filesystem::path p(image);
  if (p.is_absolute() || base_dir.empty()) return image;
  return (base_dir / p).string();
}

std::vector<ManifestRecord> sample_records(const std::vector<ManifestRecord>& records,
                                           std::size_t count, std::uint64_t seed) {
  if (count >= records.size()) return records;
  Mt64Stream rng(seed);
  std::vector<ManifestRecord> out;
  out.reserve(count);
  const std::size_t n = records.size();
  for (std::size_t i = 0; i < n && out.size() < count; ++i) {
    if (rng.next_below(n - i) < count - out.size()) out.push_back(records[i]);
  }
  return out;
}

}  // namespace mixgen::dataio
