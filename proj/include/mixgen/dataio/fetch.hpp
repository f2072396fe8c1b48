#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "mixgen/dataio/manifest.hpp"

namespace mixgen::dataio {

struct FetchOptions {
  std::filesystem::path dest;
  std::size_t parallelism = 16;
  std::size_t retries = 2;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds backoff{200};  // multiplied by the attempt number
  std::filesystem::path base_dir;          // resolves relative local paths
};

struct FetchReport {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::vector<std::string> failed_ids;  // manifest order
  std::filesystem::path filtered_manifest;

  double accessible_fraction() const noexcept {
    const auto total = succeeded + failed;
    return total == 0 ? 1.0 : static_cast<double>(succeeded) / static_cast<double>(total);
  }
};

inline constexpr const char* kFilteredManifestName = "manifest.jsonl";

/// Downloads every http/https image into dest/images/, at most 1 + retries
/// attempts each. Local paths are checked for existence only. Failures are
/// recorded, never thrown; dest/manifest.jsonl receives the surviving records
/// with images rewritten to the downloaded files. Throws only
/// DestinationUnwritable.
FetchReport fetch_remote(const std::vector<ManifestRecord>& records, const FetchOptions& options);

/// {"succeeded","failed","failed_ids","accessible_fraction"}
std::string to_json(const FetchReport& report);

}  // namespace mixgen::dataio
