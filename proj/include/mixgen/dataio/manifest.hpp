#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixgen/core_types.hpp"

namespace mixgen::dataio {

/// One manifest line: an image (path or http/https URL) and its captions.
struct ManifestRecord {
  std::string id;
  std::string image;
  std::vector<std::string> captions;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

/// Parses UTF-8 JSONL with fields {"id", "image", "captions"}. Blank lines are
/// skipped; unknown fields are ignored. Throws MalformedLine (with the 1-based
/// line number) or DuplicateId.
std::vector<ManifestRecord> parse_manifest(std::istream& in);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

std::string to_json_line(const ManifestRecord& record);
void write_manifest(std::ostream& out, const std::vector<ManifestRecord>& records);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// Pair whose image has not been decoded yet.
struct PairRef {
  std::string id;     // record id + "#" + caption index
  std::string image;  // as written in the manifest
  TextSequence text;
};

/// One pair per (image, caption), in manifest order.
std::vector<PairRef> expand_pairs(const std::vector<ManifestRecord>& records);

bool is_remote(const std::string& image);

/// Resolves a manifest image path against the manifest's directory; absolute
/// paths and URLs are returned unchanged.
std::string resolve_image(const std::string& image, const std::filesystem::path& base_dir);

/// Seeded uniform subset of `count` records, manifest order preserved. Used to
/// assemble partial-source settings such as "COCO + VG + SBU + a random part
/// of CC". Returns all records when count >= records.size().
std::vector<ManifestRecord> sample_records(const std::vector<ManifestRecord>& records,
                                           std::size_t count, std::uint64_t seed);

}  // namespace mixgen::dataio
