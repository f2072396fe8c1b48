#include "mixgen/dataio/fetch.hpp"

#include <curl/curl.h>

#include <atomic>
#include <cstdio>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "mixgen/dataio/shard.hpp"
#include "mixgen/log.hpp"

namespace mixgen::dataio {

namespace {

void global_curl_init() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

std::string file_name_for(const std::string& id, const std::string& url) {
  std::string name;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    name.push_back(ok ? c : '_');
  }
  std::string path = url.substr(0, url.find_first_of("?#"));
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  std::string ext = ".img";
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash) && path.size() - dot <= 5) {
    ext = path.substr(dot);
  }
  return name + ext;
}

std::size_t write_to_file(char* data, std::size_t size, std::size_t n, void* user) {
  return std::fwrite(data, size, n, static_cast<std::FILE*>(user)) * size;
}

// One attempt; returns an error description or nullopt on success.
std::optional<std::string> download_once(CURL* curl, const std::string& url,
                                         const std::filesystem::path& target,
                                         const FetchOptions& options) {
  std::FILE* file = std::fopen(target.c_str(), "wb");
  if (!file) return "cannot create " + target.string();
  curl_easy_reset(curl);
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl, CURLOPT_TIMEOUT_MS, static_cast<long>(options.timeout.count()));
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, write_to_file);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, file);
  const CURLcode rc = curl_easy_perform(curl);
  long status = 0;
  curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &status);
  const bool closed = std::fclose(file) == 0;
  if (rc != CURLE_OK) return curl_easy_strerror(rc);
  if (status >= 400) return "HTTP " + std::to_string(status);
  if (!closed) return "write failed for " + target.string();
  return std::nullopt;
}

}  // namespace

FetchReport fetch_remote(const std::vector<ManifestRecord>& records, const FetchOptions& options) {
  prepare_output_dir(options.dest);
  global_curl_init();

  std::vector<std::optional<std::string>> resolved(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    CURL* curl = nullptr;
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const auto& rec = records[i];
      if (!is_remote(rec.image)) {
        const auto local = resolve_image(rec.image, options.base_dir);
        std::error_code ec;
        if (std::filesystem::is_regular_file(local, ec)) {
          resolved[i] = std::filesystem::absolute(local, ec).string();
        } else {
          log::warn("record '{}': local image {} missing", rec.id, local);
        }
        continue;
      }
      if (!curl) curl = curl_easy_init();
      const std::string rel = std::string(kShardImageDir) + "/" + file_name_for(rec.id, rec.image);
      const auto target = options.dest / rel;
      std::optional<std::string> error = "curl init failed";
      for (std::size_t attempt = 0; curl && attempt <= options.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options.backoff * attempt);
        error = download_once(curl, rec.image, target, options);
        if (!error) break;
        log::debug("record '{}': attempt {} failed: {}", rec.id, attempt + 1, *error);
      }
      if (error) {
        std::error_code ec;
        std::filesystem::remove(target, ec);
        log::warn("record '{}': giving up on {}: {}", rec.id, rec.image, *error);
      } else {
        resolved[i] = rel;
      }
    }
    if (curl) curl_easy_cleanup(curl);
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.parallelism, records.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  pool.clear();

  FetchReport report;
  std::vector<ManifestRecord> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (resolved[i]) {
      ++report.succeeded;
      ManifestRecord r = records[i];
      r.image = *resolved[i];
      kept.push_back(std::move(r));
    } else {
      ++report.failed;
      report.failed_ids.push_back(records[i].id);
    }
  }
  report.filtered_manifest = options.dest / kFilteredManifestName;
  write_manifest(report.filtered_manifest, kept);
  return report;
}

std::string to_json(const FetchReport& report) {
  nlohmann::ordered_json obj;
  obj["succeeded"] = report.succeeded;
  obj["failed"] = report.failed;
  obj["failed_ids"] = report.failed_ids;
  obj["accessible_fraction"] = report.accessible_fraction();
  return obj.dump();
}

}  // namespace mixgen::dataio
