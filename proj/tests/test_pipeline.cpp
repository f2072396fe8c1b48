#include <fstream>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "mixgen/dataio/manifest.hpp"
#include "mixgen/dataio/shard.hpp"
#include "mixgen/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mixgen;
using testing::TempDir;

namespace {

Batch random_batch(std::size_t b, std::size_t h, std::size_t w, RandomStream& rng) {
  static const char* kWords[] = {"a", "dog", "cat", "runs", "on", "grass", "under", "sky"};
  Batch batch;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<float> px(h * w * 3);
    for (auto& v : px) v = static_cast<float>(rng.next_unit());
    std::string text;
    const auto n = 1 + rng.next_below(6);
    for (std::uint64_t k = 0; k < n; ++k) text += std::string(k ? " " : "") + kWords[rng.next_below(8)];
    batch.pairs.push_back({"p" + std::to_string(i), ImageTensor::create(h, w, std::move(px)), TextSequence(text)});
  }
  return batch;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[std::filesystem::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return files;
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("resolve_m") {
  CHECK(resolve_m(MFraction{0.25}, 512) == 128);
  CHECK(resolve_m(MFraction{0.25}, 8) == 2);
  CHECK(resolve_m(MFraction{0.25}, 3) == 0);
  CHECK(resolve_m(MFraction{0.5}, 7) == 3);
  CHECK(resolve_m(MAbsolute{4}, 8) == 4);
  CHECK_THROWS_WITH_AS(resolve_m(MAbsolute{5}, 8), doctest::Contains("MTooLarge"), Error);
}

TEST_CASE("B=8, M=2 pairs 0 with 2 and 1 with 3") {
  Mt64Stream data_rng(41);
  MixGenConfig config;  // lambda 0.5, M = B/4
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_batch(8, 5, 4, data_rng);
    Mt64Stream rng(static_cast<std::uint64_t>(trial));
    std::vector<MixProvenance> prov;
    const auto out = apply_mixgen(in, config, rng, &prov);
    REQUIRE(out.pairs.size() == 8);
    REQUIRE(prov.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& a = in.pairs[i];
      const auto& b = in.pairs[i + 2];
      const auto oracle = testing::lerp_oracle(a.image.data(), b.image.data(), 0.5);
      for (std::size_t p = 0; p < oracle.size(); ++p) CHECK(std::abs(out.pairs[i].image.data()[p] - oracle[p]) <= 1e-6);
      CHECK(out.pairs[i].text.raw() == a.text.raw() + " " + b.text.raw());
      CHECK(prov[i].sources == std::array<std::string, 2>{a.id, b.id});
      CHECK(prov[i].lambda == 0.5);
    }
    for (std::size_t i = 2; i < 8; ++i) {
      CHECK(out.pairs[i].id == in.pairs[i].id);
      CHECK(out.pairs[i].image == in.pairs[i].image);
      CHECK(out.pairs[i].text == in.pairs[i].text);
    }
  }
}

TEST_CASE("M=0 leaves the batch untouched") {
  Mt64Stream data_rng(42);
  const auto in = random_batch(3, 2, 2, data_rng);
  MixGenConfig config;
  testing::ScriptedStream no_draws({});
  const auto out = apply_mixgen(in, config, no_draws);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out.pairs[i].image == in.pairs[i].image);
}

TEST_CASE("B=512 keeps 384 originals and adds 128 generated pairs") {
  Mt64Stream data_rng(43);
  const auto in = random_batch(512, 2, 2, data_rng);
  MixGenConfig config;
  Mt64Stream rng(1);
  std::vector<MixProvenance> prov;
  const auto out = apply_mixgen(in, config, rng, &prov);
  CHECK(prov.size() == 128);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 512; ++i) kept += out.pairs[i].id == in.pairs[i].id && out.pairs[i].image == in.pairs[i].image;
  CHECK(kept == 384);
  for (std::size_t i = 0; i < 128; ++i) CHECK(prov[i].sources[1] == in.pairs[i + 128].id);
}

TEST_CASE("derive_stream_seed regression vectors") {
  CHECK(derive_stream_seed(42, 0) == 0xa759ea27d4727622ULL);
  CHECK(derive_stream_seed(42, 1) == 0xbdd732262feb6e95ULL);
  CHECK(derive_stream_seed(0, 0) == 0ULL);
  CHECK(derive_stream_seed(0, 1) == 0xe220a8397b1dcdafULL);
  CHECK(derive_stream_seed(7, 123456789) == 0xc05c14a434f89168ULL);
}

TEST_CASE("plan_batches") {
  const auto plans = plan_batches(10, 4, 99, true);
  REQUIRE(plans.size() == 2);
  const auto keep = plan_batches(10, 4, 99, false);
  REQUIRE(keep.size() == 3);
  CHECK(keep[2].member_indices.size() == 2);
  CHECK(keep[0] == plans[0]);
  std::set<std::size_t> all;
  for (const auto& p : keep) all.insert(p.member_indices.begin(), p.member_indices.end());
  CHECK(all.size() == 10);
  CHECK(plan_batches(10, 4, 99, true) == plans);
  CHECK(plan_batches(10, 4, 100, true) != plans);
  CHECK_THROWS_WITH_AS(plan_batches(3, 4, 1, true), doctest::Contains("DatasetTooSmall"), Error);
  CHECK(plan_batches(3, 4, 1, false).size() == 1);
}

TEST_CASE("augment_buffer matches apply_mixgen on the same content") {
  const std::size_t b = 8, h = 3, w = 4;
  Mt64Stream data_rng(44);
  const auto batch = random_batch(b, h, w, data_rng);
  std::vector<float> buffer;
  std::vector<std::string> texts;
  for (const auto& p : batch.pairs) {
    buffer.insert(buffer.end(), p.image.data().begin(), p.image.data().end());
    texts.push_back(p.text.raw());
  }
  for (Variant v : {Variant::Default, Variant::B, Variant::D, Variant::E}) {
    MixGenConfig config;
    config.variant = v;
    config.seed = 5;
    Batch renamed = batch;
    for (std::size_t i = 0; i < b; ++i) renamed.pairs[i].id = std::to_string(i);
    Mt64Stream rng(derive_stream_seed(config.seed, 3));
    const auto want = apply_mixgen(renamed, config, rng);

    auto in_place = buffer;
    auto in_texts = texts;
    augment_buffer(in_place, b, h, w, in_texts, config, 3);
    std::vector<float> out(buffer.size(), -1.0f);
    auto out_texts = texts;
    auto untouched = buffer;
    augment_buffer(untouched, b, h, w, out_texts, config, 3, out);
    CHECK(untouched == buffer);
    CHECK(out == in_place);
    CHECK(out_texts == in_texts);
    for (std::size_t i = 0; i < b; ++i) {
      const auto img = std::span<const float>(in_place).subspan(i * h * w * 3, h * w * 3);
      CHECK(std::equal(img.begin(), img.end(), want.pairs[i].image.data().begin()));
      CHECK(in_texts[i] == want.pairs[i].text.raw());
    }
  }
  std::vector<float> small(2 * 3 * 4 * 3, 0.5f);
  std::vector<std::string> two{"a", "b"};
  CHECK_THROWS_AS(augment_buffer(std::span<float>(small).first(5), 2, 3, 4, two, MixGenConfig{}, 0), Error);
}

TEST_CASE("run writes a deterministic shard for any worker count") {
  TempDir dir;
  const auto ds = testing::write_synthetic_dataset(dir / "data", 12, 2, 20, 24);
  RunOptions opt;
  opt.manifest = ds.manifest;
  opt.batch_size = 8;
  opt.config.target_height = 16;
  opt.config.target_width = 16;
  opt.config.seed = 3;
  opt.workers = 1;
  opt.out_dir = dir / "w1";
  const auto report = run(opt);
  CHECK(report.batches_processed == 3);
  CHECK(report.pairs_emitted == 24);
  CHECK(report.pairs_generated_by_mixgen == 6);
  opt.workers = 3;
  opt.out_dir = dir / "w3";
  run(opt);
  opt.out_dir = dir / "w3again";
  run(opt);
  const auto a = snapshot(dir / "w1");
  CHECK(a.size() == 25);
  CHECK(a == snapshot(dir / "w3"));
  CHECK(a == snapshot(dir / "w3again"));

  const auto lines = read_jsonl(dir / "w1" / dataio::kShardManifestName);
  REQUIRE(lines.size() == 24);
  CHECK(lines[0]["sources"].size() == 2);
  CHECK(lines[0]["variant"] == "default");
  CHECK(lines[2]["variant"] == "original");
  CHECK(lines[2]["lambda"].is_null());

  const auto j = nlohmann::json::parse(to_json(report));
  CHECK(j["pairs_generated_by_mixgen"] == 6);
  CHECK(j["per_stage_timing"].contains("mixgen"));
}

TEST_CASE("run reports an unreadable record and can skip its batch") {
  TempDir dir;
  auto ds = testing::write_synthetic_dataset(dir / "data", 8, 1, 8, 8);
  ds.records[5].image = "img/missing.png";
  dataio::write_manifest(ds.manifest, ds.records);
  RunOptions opt;
  opt.manifest = ds.manifest;
  opt.out_dir = dir / "out";
  opt.batch_size = 4;
  opt.workers = 2;
  opt.config.target_height = 8;
  opt.config.target_width = 8;
  CHECK_THROWS_WITH_AS(run(opt), doctest::Contains("img5#0"), Error);
  opt.skip_errors = true;
  const auto report = run(opt);
  CHECK(report.batches_skipped == 1);
  CHECK(report.batches_processed == 1);
  CHECK(report.skipped_records == std::vector<std::string>{"img5#0"});
  CHECK(read_jsonl(dir / "out" / dataio::kShardManifestName).size() == 4);
}

TEST_CASE("bench reports stage timings") {
  TempDir dir;
  const auto ds = testing::write_synthetic_dataset(dir.path(), 16, 1, 32, 32);
  BenchOptions opt;
  opt.manifest = ds.manifest;
  opt.batch_size = 8;
  opt.iterations = 2;
  opt.config.target_height = 32;
  opt.config.target_width = 32;
  const auto r = bench(opt);
  CHECK(r.pairs == 32);  // 16 pairs, timed twice
  CHECK(r.batches == 2);
  CHECK(r.pairs_generated == 4);
  CHECK(r.mixgen_seconds > 0.0);
  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* key : {"batches", "pairs", "pairs_generated", "pairs_per_sec", "overhead_ratio"}) CHECK(j.contains(key));
  CHECK(j["per_stage_timing"].contains("copy_baseline"));
}
