#include <atomic>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "mixgen/dataio/fetch.hpp"
#include "support/fixtures.hpp"

using namespace mixgen;
using namespace mixgen::dataio;
using testing::TempDir;

namespace {

class LocalServer {
 public:
  LocalServer() {
    png_ = encode_png(testing::synthetic_rgb(4, 4, 1));
    server_.Get(R"(/ok/(\w+)\.png)", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(png_.begin(), png_.end()), "image/png");
    });
    server_.Get("/gone.png", [this](const httplib::Request&, httplib::Response& res) {
      ++gone_hits;
      res.status = 404;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  std::atomic<int> gone_hits{0};
  std::vector<std::uint8_t> png_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST_CASE("fetch tolerates a dead link and retries it a bounded number of times") {
  LocalServer server;
  TempDir dir;
  const std::vector<ManifestRecord> recs{
      {"a", server.url("/ok/a.png"), {"first"}},
      {"b", server.url("/gone.png"), {"second"}},
      {"c", server.url("/ok/c.png"), {"third"}},
  };
  FetchOptions opt;
  opt.dest = dir / "dest";
  opt.parallelism = 2;
  opt.retries = 2;
  opt.backoff = std::chrono::milliseconds(1);
  const auto report = fetch_remote(recs, opt);
  CHECK(report.succeeded == 2);
  CHECK(report.failed == 1);
  CHECK(report.failed_ids == std::vector<std::string>{"b"});
  CHECK(server.gone_hits == 3);
  CHECK(report.accessible_fraction() == doctest::Approx(2.0 / 3.0));
  CHECK(count_lines(report.filtered_manifest) == 2);

  const auto kept = read_manifest(report.filtered_manifest);
  CHECK(kept[0].id == "a");
  CHECK(read_file(opt.dest / kept[0].image) == server.png_);

  const auto j = nlohmann::json::parse(to_json(report));
  CHECK(j["failed_ids"] == nlohmann::json::array({"b"}));
  CHECK(j.contains("accessible_fraction"));
}

TEST_CASE("fetch leaves local records alone") {
  TempDir dir;
  const auto ds = testing::write_synthetic_dataset(dir / "data", 3, 1, 4, 4);
  FetchOptions opt;
  opt.dest = dir / "dest";
  opt.base_dir = dir / "data";
  const auto report = fetch_remote(ds.records, opt);
  CHECK(report.succeeded == 3);
  CHECK(report.failed == 0);
  CHECK(count_lines(report.filtered_manifest) == 3);
  CHECK(std::filesystem::is_empty(dir / "dest" / "images"));
}

TEST_CASE("fetch reports an unwritable destination") {
  TempDir dir;
  std::ofstream(dir / "plain") << "x";
  FetchOptions opt;
  opt.dest = dir / "plain" / "dest";
  CHECK_THROWS_WITH_AS(fetch_remote({}, opt), doctest::Contains("DestinationUnwritable"), Error);
}
