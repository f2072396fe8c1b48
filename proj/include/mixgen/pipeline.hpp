#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mixgen/augment.hpp"
#include "mixgen/core_types.hpp"
#include "mixgen/random.hpp"

namespace mixgen {

/// Number of leading batch entries replaced by generated pairs.
/// Fraction(f) -> floor(f * B); Absolute(m) -> m. Throws MTooLarge if 2M > B.
std::size_t resolve_m(const MPolicy& policy, std::size_t batch_size);

struct MixProvenance {
  std::array<std::string, 2> sources;
  double lambda = 0.5;
  Variant variant = Variant::Default;
};

/// Replaces pair i (i < M) by make_pair(pair i, pair i + M). Pairs at M and
/// beyond are returned untouched; every source read is an original because
/// i < M <= i + M. When `provenance` is given it receives M entries.
Batch apply_mixgen(Batch batch, const MixGenConfig& config, RandomStream& rng,
                   std::vector<MixProvenance>* provenance = nullptr);

/// Per-batch stream seed: splitmix64 finalizer of
/// global_seed ^ (batch_index * 0x9E3779B97F4A7C15).
std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::uint64_t batch_index) noexcept;

struct BatchPlan {
  std::uint64_t batch_index = 0;
  std::vector<std::size_t> member_indices;

  friend bool operator==(const BatchPlan&, const BatchPlan&) = default;
};

/// Seeded Fisher-Yates permutation of 0..dataset_size-1 cut into chunks of B.
/// A short final chunk is kept unless drop_last. Throws DatasetTooSmall when
/// drop_last and dataset_size < B.
std::vector<BatchPlan> plan_batches(std::size_t dataset_size, std::size_t batch_size,
                                    std::uint64_t shuffle_seed, bool drop_last);

/// Seed used by `run` to shuffle the dataset, derived from the config seed.
std::uint64_t shuffle_seed_for(std::uint64_t config_seed) noexcept;

/// In-place augmentation of a caller-owned B x H x W x 3 float buffer, for
/// trainer integrations. Produces exactly what `apply_mixgen` produces for a
/// batch with the same content, seeded with derive_stream_seed(config.seed,
/// batch_index). Generated images are written to `out` when it is non-empty
/// (all B images are then copied there), otherwise over `images`. Pair ids
/// default to the decimal position in the batch.
void augment_buffer(std::span<float> images, std::size_t batch_size, std::size_t height,
                    std::size_t width, std::vector<std::string>& texts, const MixGenConfig& config,
                    std::uint64_t batch_index, std::span<float> out = {},
                    std::vector<MixProvenance>* provenance = nullptr);

struct RunOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::size_t batch_size = 512;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool drop_last = true;
  bool skip_errors = false;
  MixGenConfig config;
  /// Runs on each loaded batch before augmentation (e.g. uni-modal
  /// transforms). Must be deterministic for outputs to stay reproducible.
  std::function<void(Batch&, std::uint64_t batch_index)> pre_augment;
};

struct RunReport {
  std::size_t batches_processed = 0;
  std::size_t batches_skipped = 0;
  std::size_t pairs_emitted = 0;
  std::size_t pairs_generated_by_mixgen = 0;
  std::vector<std::string> skipped_records;
  double wall_time = 0.0;
  std::map<std::string, double> per_stage_timing;  // seconds summed over workers
};

/// Loads, augments and writes every planned batch to out_dir (PNG images plus
/// shard.jsonl). Output bytes do not depend on `workers`. A record that fails
/// to load aborts the run with batch and record context, or with skip_errors
/// drops its whole batch and is listed in the report.
RunReport run(const RunOptions& options);

std::string to_json(const RunReport& report);

struct BenchOptions {
  std::filesystem::path manifest;
  std::size_t batch_size = 512;
  std::size_t iterations = 1;
  MixGenConfig config;
};

struct BenchReport {
  std::size_t pairs = 0;
  std::size_t batches = 0;
  std::size_t pairs_generated = 0;
  double load_seconds = 0.0;
  double mixgen_seconds = 0.0;    // copy of the batch + apply_mixgen
  double baseline_seconds = 0.0;  // copy of the batch only
  double overhead_ratio() const noexcept {
    return baseline_seconds > 0.0 ? mixgen_seconds / baseline_seconds : 0.0;
  }
  double pairs_per_second() const noexcept {
    return mixgen_seconds > 0.0 ? static_cast<double>(pairs) / mixgen_seconds : 0.0;
  }
};

/// Streams the manifest batch by batch, timing decode/resize once and the
/// augmentation stage against a pass-through copy `iterations` times.
BenchReport bench(const BenchOptions& options);

std::string to_json(const BenchReport& report);

}  // namespace mixgen
