#include "mixgen/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "mixgen/dataio/image_io.hpp"
#include "mixgen/dataio/manifest.hpp"
#include "mixgen/dataio/shard.hpp"
#include "mixgen/log.hpp"

namespace mixgen {

std::size_t resolve_m(const MPolicy& policy, std::size_t batch_size) {
  std::size_t m = 0;
  if (const auto* frac = std::get_if<MFraction>(&policy)) {
    if (!(frac->fraction >= 0.0 && frac->fraction <= 0.5)) {
      throw Error(ErrorCode::InvalidMRatio, "M fraction " + std::to_string(frac->fraction) + " outside [0,0.5]");
    }
    m = static_cast<std::size_t>(frac->fraction * static_cast<double>(batch_size));
  } else {
    m = std::get<MAbsolute>(policy).m;
  }
  if (m > batch_size / 2) {
    throw Error(ErrorCode::MTooLarge, "M=" + std::to_string(m) + " needs 2M <= B=" + std::to_string(batch_size));
  }
  return m;
}

Batch apply_mixgen(Batch batch, const MixGenConfig& config, RandomStream& rng,
                   std::vector<MixProvenance>* provenance) {
  const std::size_t m = resolve_m(config.m_policy, batch.size());
  if (provenance) provenance->clear();
  for (std::size_t i = 0; i < m; ++i) {
    auto generated = make_pair(batch.pairs[i], batch.pairs[i + m], config, rng);
    if (provenance) {
      provenance->push_back({{generated.sources[0], generated.sources[1]}, generated.lambda_used,
                             generated.variant_used});
    }
    batch.pairs[i] = std::move(generated.pair);
  }
  return batch;
}

std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::uint64_t batch_index) noexcept {
  return splitmix64_finalize(global_seed ^ (batch_index * 0x9E3779B97F4A7C15ULL));
}

std::uint64_t shuffle_seed_for(std::uint64_t config_seed) noexcept {
  return splitmix64_finalize(config_seed ^ 0x53485546464C4531ULL);
}

std::vector<BatchPlan> plan_batches(std::size_t dataset_size, std::size_t batch_size,
                                    std::uint64_t shuffle_seed, bool drop_last) {
  if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch size must be positive");
  if (drop_last && dataset_size < batch_size) {
    throw Error(ErrorCode::DatasetTooSmall, std::to_string(dataset_size) + " pairs cannot fill one batch of " +
                                                std::to_string(batch_size));
  }
  std::vector<std::size_t> order(dataset_size);
  for (std::size_t i = 0; i < dataset_size; ++i) order[i] = i;
  Mt64Stream rng(shuffle_seed);
  for (std::size_t i = dataset_size; i > 1; --i) {
    std::swap(order[i - 1], order[rng.next_below(i)]);
  }
  std::vector<BatchPlan> plans;
  for (std::size_t start = 0; start < dataset_size; start += batch_size) {
    const std::size_t end = std::min(start + batch_size, dataset_size);
    if (end - start < batch_size && drop_last) break;
    plans.push_back({plans.size(), {order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(end)}});
  }
  return plans;
}

void augment_buffer(std::span<float> images, std::size_t batch_size, std::size_t height,
                    std::size_t width, std::vector<std::string>& texts, const MixGenConfig& config,
                    std::uint64_t batch_index, std::span<float> out,
                    std::vector<MixProvenance>* provenance) {
  const std::size_t stride = height * width * ImageTensor::kChannels;
  if (stride == 0 || images.size() != batch_size * stride) {
    throw Error(ErrorCode::ShapeMismatch, "image buffer holds " + std::to_string(images.size()) +
                                              " floats, shape needs " + std::to_string(batch_size * stride));
  }
  if (texts.size() != batch_size) {
    throw Error(ErrorCode::ShapeMismatch, std::to_string(texts.size()) + " texts for batch of " +
                                              std::to_string(batch_size));
  }
  if (!out.empty()) {
    if (out.size() != images.size()) throw Error(ErrorCode::ShapeMismatch, "output buffer size differs");
    std::copy(images.begin(), images.end(), out.begin());
  }
  std::span<float> target = out.empty() ? images : out;
  const std::size_t m = resolve_m(config.m_policy, batch_size);
  Mt64Stream rng(derive_stream_seed(config.seed, batch_index));
  if (provenance) provenance->clear();
  for (std::size_t i = 0; i < m; ++i) {
    auto plan = plan_pair(TextSequence(texts[i]), TextSequence(texts[i + m]), config, rng);
    if (!(plan.lambda >= 0.0 && plan.lambda <= 1.0)) {
      throw Error(ErrorCode::InvalidLambda, "lambda " + std::to_string(plan.lambda) + " outside [0,1]");
    }
    auto dst = target.subspan(i * stride, stride);
    render_image(plan, dst, target.subspan((i + m) * stride, stride), dst);
    if (provenance) provenance->push_back({{std::to_string(i), std::to_string(i + m)}, plan.lambda, config.variant});
    texts[i] = plan.text.raw();
  }
  for (std::size_t i = m; i < batch_size; ++i) texts[i] = normalize_text(texts[i]);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Dataset {
  std::vector<dataio::PairRef> pairs;
  std::filesystem::path base_dir;
};

Dataset open_dataset(const std::filesystem::path& manifest) {
  Dataset ds;
  ds.pairs = dataio::expand_pairs(dataio::read_manifest(manifest));
  ds.base_dir = manifest.parent_path();
  return ds;
}

// Thrown by load_batch to carry the failing record id.
struct RecordError {
  std::string record_id;
  Error error;
};

Batch load_batch(const Dataset& ds, const BatchPlan& plan, const MixGenConfig& config) {
  Batch batch;
  batch.pairs.reserve(plan.member_indices.size());
  for (std::size_t idx : plan.member_indices) {
    const auto& ref = ds.pairs[idx];
    try {
      const auto path = dataio::resolve_image(ref.image, ds.base_dir);
      if (dataio::is_remote(path)) {
        throw Error(ErrorCode::UnsupportedFormat, path + " is remote; fetch the manifest first");
      }
      batch.pairs.push_back({ref.id, dataio::load_image(path, config.target_height, config.target_width), ref.text});
    } catch (const Error& e) {
      throw RecordError{ref.id, e};
    }
  }
  return batch;
}

struct StageTimes {
  double load = 0, mixgen = 0, write = 0;
};

struct BatchOutcome {
  std::string lines;
  std::size_t emitted = 0;
  std::size_t generated = 0;
  std::optional<std::string> skipped_record;
  std::exception_ptr error;
};

BatchOutcome process_batch(const Dataset& ds, const BatchPlan& plan, const RunOptions& options,
                           StageTimes& times) {
  BatchOutcome outcome;
  auto t0 = Clock::now();
  Batch batch;
  try {
    batch = load_batch(ds, plan, options.config);
  } catch (const RecordError& e) {
    if (options.skip_errors) {
      log::warn("batch {}: skipping, record '{}' failed: {}", plan.batch_index, e.record_id, e.error.what());
      outcome.skipped_record = e.record_id;
      times.load += seconds_since(t0);
      return outcome;
    }
    throw Error(e.error.code(), "batch " + std::to_string(plan.batch_index) + ", record '" + e.record_id +
                                    "': " + e.error.what());
  }
  times.load += seconds_since(t0);

  if (options.pre_augment) options.pre_augment(batch, plan.batch_index);

  t0 = Clock::now();
  Mt64Stream rng(derive_stream_seed(options.config.seed, plan.batch_index));
  std::vector<MixProvenance> provenance;
  batch = apply_mixgen(std::move(batch), options.config, rng, &provenance);
  times.mixgen += seconds_since(t0);

  t0 = Clock::now();
  for (std::size_t pos = 0; pos < batch.size(); ++pos) {
    char name[48];
    std::snprintf(name, sizeof(name), "%06llu_%04zu.png", static_cast<unsigned long long>(plan.batch_index), pos);
    const std::string rel = std::string(dataio::kShardImageDir) + "/" + name;
    const auto& pair = batch.pairs[pos];
    try {
      dataio::write_png(options.out_dir / rel, pair.image);
    } catch (const Error& e) {
      throw Error(e.code(), "pair '" + pair.id + "': " + e.what());
    }
    dataio::ShardLine line;
    if (pos < provenance.size()) {
      const auto& p = provenance[pos];
      line = {pair.id, rel, pair.text.raw(), p.lambda, std::string(to_string(p.variant)),
              {p.sources[0], p.sources[1]}};
    } else {
      line = dataio::shard_line_for(pair, rel);
    }
    outcome.lines += dataio::to_json_line(line);
    outcome.lines += '\n';
  }
  times.write += seconds_since(t0);
  outcome.emitted = batch.size();
  outcome.generated = provenance.size();
  return outcome;
}

}  // namespace

RunReport run(const RunOptions& options) {
  const auto wall_start = Clock::now();
  const MixGenConfig config = validate_config(options.config);
  const Dataset ds = open_dataset(options.manifest);
  const auto plans = plan_batches(ds.pairs.size(), options.batch_size, shuffle_seed_for(config.seed),
                                  options.drop_last);
  // Fail fast on an impossible M before touching any image; partial final
  // batches are re-checked per batch.
  if (!plans.empty()) resolve_m(config.m_policy, plans.front().member_indices.size());
  dataio::prepare_output_dir(options.out_dir);

  const auto sidecar_path = options.out_dir / dataio::kShardManifestName;
  std::ofstream sidecar(sidecar_path, std::ios::binary | std::ios::trunc);
  if (!sidecar) throw Error(ErrorCode::Io, "cannot create " + sidecar_path.string());

  std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::max<std::size_t>(1, std::min(workers, plans.size()));
  const std::size_t window = 2 * workers;

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, BatchOutcome> done;
  std::size_t next_claim = 0;
  std::size_t flushed = 0;
  bool stop = false;
  StageTimes totals;

  auto worker = [&] {
    StageTimes local;
    for (;;) {
      std::size_t k = 0;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return stop || next_claim >= plans.size() || next_claim < flushed + window; });
        if (stop || next_claim >= plans.size()) break;
        k = next_claim++;
      }
      BatchOutcome outcome;
      try {
        outcome = process_batch(ds, plans[k], options, local);
      } catch (...) {
        outcome.error = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        done.emplace(k, std::move(outcome));
      }
      cv.notify_all();
    }
    std::lock_guard lock(mu);
    totals.load += local.load;
    totals.mixgen += local.mixgen;
    totals.write += local.write;
  };

  RunReport report;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);

    for (std::size_t k = 0; k < plans.size(); ++k) {
      BatchOutcome outcome;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return done.count(k) != 0; });
        outcome = std::move(done.at(k));
        done.erase(k);
        flushed = k + 1;
      }
      cv.notify_all();
      if (outcome.error) {
        failure = outcome.error;
        break;
      }
      if (outcome.skipped_record) {
        ++report.batches_skipped;
        report.skipped_records.push_back(*outcome.skipped_record);
        continue;
      }
      sidecar << outcome.lines;
      ++report.batches_processed;
      report.pairs_emitted += outcome.emitted;
      report.pairs_generated_by_mixgen += outcome.generated;
    }
    {
      std::lock_guard lock(mu);
      stop = true;
    }
    cv.notify_all();
  }
  if (failure) std::rethrow_exception(failure);
  sidecar.flush();
  if (!sidecar) throw Error(ErrorCode::Io, "short write to " + sidecar_path.string());

  report.per_stage_timing = {{"load", totals.load}, {"mixgen", totals.mixgen}, {"write", totals.write}};
  report.wall_time = seconds_since(wall_start);
  log::info("run: {} batches, {} pairs, {} generated in {:.3f}s", report.batches_processed,
            report.pairs_emitted, report.pairs_generated_by_mixgen, report.wall_time);
  return report;
}

std::string to_json(const RunReport& report) {
  nlohmann::ordered_json obj;
  obj["batches_processed"] = report.batches_processed;
  obj["batches_skipped"] = report.batches_skipped;
  obj["pairs_emitted"] = report.pairs_emitted;
  obj["pairs_generated_by_mixgen"] = report.pairs_generated_by_mixgen;
  obj["skipped_records"] = report.skipped_records;
  obj["wall_time"] = report.wall_time;
  obj["per_stage_timing"] = report.per_stage_timing;
  return obj.dump();
}

BenchReport bench(const BenchOptions& options) {
  const MixGenConfig config = validate_config(options.config);
  const Dataset ds = open_dataset(options.manifest);
  const auto plans = plan_batches(ds.pairs.size(), options.batch_size, shuffle_seed_for(config.seed), true);
  const std::size_t iterations = std::max<std::size_t>(1, options.iterations);

  BenchReport report;
  for (const auto& plan : plans) {
    auto t0 = Clock::now();
    Batch batch;
    try {
      batch = load_batch(ds, plan, config);
    } catch (const RecordError& e) {
      throw Error(e.error.code(), "record '" + e.record_id + "': " + e.error.what());
    }
    report.load_seconds += seconds_since(t0);

    for (std::size_t it = 0; it < iterations; ++it) {
      t0 = Clock::now();
      Batch copy = batch;
      report.baseline_seconds += seconds_since(t0);
      if (copy.pairs.empty()) throw Error(ErrorCode::Io, "empty batch");

      t0 = Clock::now();
      Mt64Stream rng(derive_stream_seed(config.seed, plan.batch_index));
      Batch mixed = apply_mixgen(Batch(batch), config, rng);
      report.mixgen_seconds += seconds_since(t0);
      if (it == 0) report.pairs_generated += resolve_m(config.m_policy, mixed.size());
      report.pairs += mixed.size();
    }
    ++report.batches;
  }
  return report;
}

std::string to_json(const BenchReport& report) {
  nlohmann::ordered_json obj;
  obj["batches"] = report.batches;
  obj["pairs"] = report.pairs;
  obj["pairs_generated"] = report.pairs_generated;
  obj["pairs_per_sec"] = report.pairs_per_second();
  obj["overhead_ratio"] = report.overhead_ratio();
  nlohmann::ordered_json stages;
  stages["load"] = report.load_seconds;
  stages["mixgen"] = report.mixgen_seconds;
  stages["copy_baseline"] = report.baseline_seconds;
  obj["per_stage_timing"] = stages;
  return obj.dump();
}

}  // namespace mixgen
