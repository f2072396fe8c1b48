#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "mixgen/augment.hpp"
#include "mixgen/dataio/fetch.hpp"
#include "mixgen/dataio/image_io.hpp"
#include "mixgen/dataio/manifest.hpp"
#include "mixgen/dataio/shard.hpp"
#include "mixgen/dataio/stats.hpp"
#include "mixgen/dataio/tensor_file.hpp"
#include "mixgen/embedding_mix.hpp"
#include "mixgen/metrics.hpp"
#include "mixgen/pipeline.hpp"

namespace mixgen::cli {

namespace {

// Raised for flag combinations CLI11 cannot express; maps to exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by augment and preview.
struct MixFlags {
  double m_ratio = 0.25;
  std::size_t m = 0;
  double lambda = 0.5;
  std::string beta;
  std::string variant = "default";
  std::uint64_t seed = 0;
  std::string resize = "256x256";
  std::size_t max_tokens = 0;

  CLI::Option* m_opt = nullptr;
  CLI::Option* m_ratio_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* max_tokens_opt = nullptr;

  void add_mix_options(CLI::App* app) {
    lambda_opt = app->add_option("--lambda", lambda, "Fixed interpolation weight in [0,1]")
                     ->capture_default_str();
    beta_opt = app->add_option("--beta", beta, "Sample lambda from Beta(A,B), given as A,B")
                   ->excludes(lambda_opt);
    app->add_option("--variant", variant, "Generation variant")
        ->check(CLI::IsMember({"default", "a", "b", "c", "d", "e"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Global seed")->capture_default_str();
    app->add_option("--resize", resize, "Target size HxW")->capture_default_str();
    max_tokens_opt = app->add_option("--max-tokens", max_tokens, "Token cap applied after concatenation")
                         ->check(CLI::PositiveNumber);
  }

  void add_m_options(CLI::App* app) {
    m_ratio_opt = app->add_option("--m-ratio", m_ratio, "Replaced fraction of each batch, at most 0.5")
                      ->capture_default_str();
    m_opt = app->add_option("--m", m, "Replaced pairs per batch")->excludes(m_ratio_opt);
  }

  MixGenConfig config() const {
    MixGenConfig c;
    if (beta_opt && beta_opt->count()) {
      const auto comma = beta.find(',');
      try {
        if (comma == std::string::npos) throw std::invalid_argument(beta);
        std::size_t used = 0;
        const double a = std::stod(beta.substr(0, comma), &used);
        const double b = std::stod(beta.substr(comma + 1));
        c.lambda_policy = BetaLambda{a, b};
      } catch (const std::logic_error&) {
        throw UsageError("--beta expects A,B, got '" + beta + "'");
      }
    } else {
      c.lambda_policy = FixedLambda{lambda};
    }
    if (m_opt && m_opt->count()) {
      c.m_policy = MAbsolute{m};
    } else {
      c.m_policy = MFraction{m_ratio};
    }
    c.variant = *parse_variant(variant);
    c.seed = seed;
    const auto x = resize.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(resize);
      std::size_t used = 0;
      const auto h = std::stoull(resize.substr(0, x), &used);
      if (used != x) throw std::invalid_argument(resize);
      const auto w = std::stoull(resize.substr(x + 1), &used);
      if (used != resize.size() - x - 1) throw std::invalid_argument(resize);
      c.target_height = h;
      c.target_width = w;
    } catch (const std::logic_error&) {
      throw UsageError("--resize expects HxW, got '" + resize + "'");
    }
    if (max_tokens_opt && max_tokens_opt->count()) c.max_tokens = max_tokens;
    return validate_config(c);
  }
};

std::size_t parse_workers(const std::string& text) {
  if (text == "auto") return std::max(1u, std::thread::hardware_concurrency());
  try {
    std::size_t used = 0;
    const auto n = std::stoull(text, &used);
    if (used == text.size() && n > 0) return n;
  } catch (const std::logic_error&) {
  }
  throw UsageError("--workers expects a positive integer or 'auto', got '" + text + "'");
}

bool is_usage_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLambda:
    case ErrorCode::InvalidMRatio:
    case ErrorCode::InvalidBetaParams:
    case ErrorCode::InvalidConfig:
    case ErrorCode::MTooLarge:
      return true;
    default:
      return false;
  }
}

std::vector<std::vector<std::size_t>> read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    const auto doc = nlohmann::json::parse(in);
    return doc.at("image_to_texts").get<std::vector<std::vector<std::size_t>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InconsistentGroundTruth, path + ": " + e.what());
  }
}

void write_preview(const std::string& manifest, const std::string& out_dir, std::size_t n,
                   const MixGenConfig& config, std::ostream& out) {
  const auto records = dataio::read_manifest(manifest);
  const auto pairs = dataio::expand_pairs(records);
  if (records.size() < 2) throw UsageError("preview needs at least 2 manifest records");
  if (n == 0 || 2 * n > pairs.size()) {
    throw UsageError("--n " + std::to_string(n) + " needs " + std::to_string(2 * n) + " pairs, manifest has " +
                     std::to_string(pairs.size()));
  }
  dataio::prepare_output_dir(out_dir);
  const auto base = std::filesystem::path(manifest).parent_path();
  const auto plan = plan_batches(pairs.size(), 2 * n, shuffle_seed_for(config.seed), true).front();
  const std::size_t h = config.target_height, w = config.target_width;
  constexpr std::size_t C = ImageTensor::kChannels;

  std::ofstream sidecar(std::filesystem::path(out_dir) / "preview.jsonl", std::ios::binary | std::ios::trunc);
  if (!sidecar) throw Error(ErrorCode::Io, "cannot create preview.jsonl in " + out_dir);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& ra = pairs[plan.member_indices[k]];
    const auto& rb = pairs[plan.member_indices[k + n]];
    const ImageTextPair a{ra.id, dataio::load_image(dataio::resolve_image(ra.image, base), h, w), ra.text};
    const ImageTextPair b{rb.id, dataio::load_image(dataio::resolve_image(rb.image, base), h, w), rb.text};
    Mt64Stream rng(derive_stream_seed(config.seed, k));
    const auto mixed = make_pair(a, b, config, rng);

    // Side by side: A | B | generated.
    std::vector<float> canvas(h * 3 * w * C);
    const ImageTensor* panels[] = {&a.image, &b.image, &mixed.pair.image};
    for (std::size_t p = 0; p < 3; ++p) {
      const auto src = panels[p]->data();
      for (std::size_t y = 0; y < h; ++y) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(y * w * C), w * C,
                    canvas.begin() + static_cast<std::ptrdiff_t>((y * 3 * w + p * w) * C));
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "preview_%04zu.png", k);
    dataio::write_png(std::filesystem::path(out_dir) / name,
                      ImageTensor(ImageTensor::Unchecked{}, h, 3 * w, std::move(canvas)));

    nlohmann::ordered_json line;
    line["index"] = k;
    line["image"] = name;
    line["sources"] = mixed.sources;
    line["text_a"] = a.text.raw();
    line["text_b"] = b.text.raw();
    line["text"] = mixed.pair.text.raw();
    line["lambda"] = mixed.lambda_used;
    line["variant"] = to_string(mixed.variant_used);
    sidecar << line.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["composites"] = n;
  summary["sidecar"] = (std::filesystem::path(out_dir) / "preview.jsonl").string();
  out << summary.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint image-text batch augmentation (image interpolation + text concatenation)", "mixgen"};
  app.require_subcommand(1);

  // augment
  auto* augment = app.add_subcommand("augment", "Augment a manifest batch by batch and write a shard");
  std::string manifest, out_dir, workers = "auto";
  std::size_t batch_size = 512;
  bool drop_last = true, skip_errors = false;
  MixFlags aug_flags;
  augment->add_option("--manifest", manifest, "Input JSONL manifest")->required()->check(CLI::ExistingFile);
  augment->add_option("--out", out_dir, "Output shard directory")->required();
  augment->add_option("--batch-size", batch_size, "Batch size B")->capture_default_str()->check(CLI::PositiveNumber);
  aug_flags.add_m_options(augment);
  aug_flags.add_mix_options(augment);
  augment->add_option("--workers", workers, "Worker threads or 'auto'")->capture_default_str();
  augment->add_option("--drop-last", drop_last, "Drop a final partial batch")->capture_default_str();
  augment->add_option("--skip-errors", skip_errors, "Skip batches with unreadable records")->capture_default_str();

  // preview
  auto* preview = app.add_subcommand("preview", "Render source/source/generated composites");
  std::string pv_manifest, pv_out;
  std::size_t pv_n = 8;
  MixFlags pv_flags;
  preview->add_option("--manifest", pv_manifest, "Input JSONL manifest")->required()->check(CLI::ExistingFile);
  preview->add_option("--out", pv_out, "Output directory")->required();
  preview->add_option("--n", pv_n, "Number of composites")->capture_default_str();
  pv_flags.add_mix_options(preview);

  // mix-embeddings
  auto* mixemb = app.add_subcommand("mix-embeddings", "Mix image features and concatenate text features");
  std::string image_a, image_b, text_a, text_b, out_prefix;
  double emb_lambda = 0.5;
  mixemb->add_option("--image-a", image_a, "Image features of pair i (tensor file)")->required();
  mixemb->add_option("--image-b", image_b, "Image features of pair j (tensor file)")->required();
  mixemb->add_option("--text-a", text_a, "Text features of pair i (tensor file)")->required();
  mixemb->add_option("--text-b", text_b, "Text features of pair j (tensor file)")->required();
  mixemb->add_option("--lambda", emb_lambda, "Interpolation weight in [0,1]")->capture_default_str();
  mixemb->add_option("--out-prefix", out_prefix, "Writes PREFIX.image.mxtn and PREFIX.text.mxtn")->required();

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Retrieval recall at 1/5/10 and RSUM");
  std::string scores_path, gt_path;
  metrics_cmd->add_option("--scores", scores_path, "Images x texts score tensor file")->required();
  metrics_cmd->add_option("--ground-truth", gt_path, "JSON {\"image_to_texts\": [[...], ...]}")->required();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Image and caption counts per manifest");
  std::vector<std::string> stats_manifests;
  stats_cmd->add_option("--manifest", stats_manifests, "Manifest(s); each is one source")->required();

  // fetch
  auto* fetch_cmd = app.add_subcommand("fetch", "Download remote images, tolerating dead links");
  std::string fetch_manifest, dest;
  std::size_t parallelism = 16, retries = 2;
  fetch_cmd->add_option("--manifest", fetch_manifest, "Input JSONL manifest")->required()->check(CLI::ExistingFile);
  fetch_cmd->add_option("--dest", dest, "Destination directory")->required();
  fetch_cmd->add_option("--parallelism", parallelism, "Concurrent downloads")->capture_default_str()->check(CLI::PositiveNumber);
  fetch_cmd->add_option("--retries", retries, "Extra attempts per URL")->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Throughput of the augmentation stage");
  std::string bench_manifest;
  std::size_t bench_batch = 512, iterations = 1;
  bench_cmd->add_option("--manifest", bench_manifest, "Input JSONL manifest")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--batch-size", bench_batch, "Batch size B")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--iterations", iterations, "Timed passes per batch")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto* target = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  // Configuration problems are usage errors; everything after is runtime.
  enum class Phase { Config, Runtime } phase = Phase::Config;
  try {
    if (augment->parsed()) {
      RunOptions options;
      options.manifest = manifest;
      options.out_dir = out_dir;
      options.batch_size = batch_size;
      options.workers = parse_workers(workers);
      options.drop_last = drop_last;
      options.skip_errors = skip_errors;
      options.config = aug_flags.config();
      resolve_m(options.config.m_policy, batch_size);
      phase = Phase::Runtime;
      out << to_json(mixgen::run(options)) << '\n';
    } else if (preview->parsed()) {
      const auto config = pv_flags.config();
      phase = Phase::Runtime;
      write_preview(pv_manifest, pv_out, pv_n, config, out);
    } else if (mixemb->parsed()) {
      if (!(emb_lambda >= 0.0 && emb_lambda <= 1.0)) {
        throw Error(ErrorCode::InvalidLambda, "lambda " + std::to_string(emb_lambda) + " outside [0,1]");
      }
      phase = Phase::Runtime;
      const auto image = mix_image_embeddings(dataio::read_tensor(image_a), dataio::read_tensor(image_b), emb_lambda);
      const auto text = concat_text_embeddings(dataio::read_tensor(text_a), dataio::read_tensor(text_b));
      const std::string image_path = out_prefix + ".image.mxtn";
      const std::string text_path = out_prefix + ".text.mxtn";
      dataio::write_tensor(image, image_path);
      dataio::write_tensor(text, text_path);
      nlohmann::ordered_json obj;
      obj["image"] = {{"path", image_path}, {"rows", image.rows()}, {"cols", image.cols()}};
      obj["text"] = {{"path", text_path}, {"rows", text.rows()}, {"cols", text.cols()}};
      out << obj.dump() << '\n';
    } else if (metrics_cmd->parsed()) {
      phase = Phase::Runtime;
      const auto tensor = dataio::read_tensor_file(scores_path);
      if (tensor.dims.size() != 2) throw Error(ErrorCode::DimMismatch, scores_path + ": scores must be rank 2");
      const metrics::ScoreMatrix scores(tensor.dims[0], tensor.dims[1], tensor.data);
      const auto gt = metrics::GroundTruth::from_image_to_texts(read_ground_truth(gt_path), scores.n_texts());
      out << metrics::to_json(metrics::evaluate_retrieval(scores, gt)) << '\n';
    } else if (stats_cmd->parsed()) {
      phase = Phase::Runtime;
      std::vector<dataio::TaggedManifest> sources;
      for (const auto& path : stats_manifests) {
        sources.push_back({std::filesystem::path(path).stem().string(), dataio::read_manifest(path)});
      }
      out << dataio::to_json(dataio::compute_stats(sources)) << '\n';
    } else if (fetch_cmd->parsed()) {
      phase = Phase::Runtime;
      dataio::FetchOptions options;
      options.dest = dest;
      options.parallelism = parallelism;
      options.retries = retries;
      options.base_dir = std::filesystem::path(fetch_manifest).parent_path();
      const auto report = dataio::fetch_remote(dataio::read_manifest(fetch_manifest), options);
      err << "accessible: " << report.succeeded << " of " << report.succeeded + report.failed << " ("
          << 100.0 * report.accessible_fraction() << "%)\n";
      out << dataio::to_json(report) << '\n';
    } else if (bench_cmd->parsed()) {
      BenchOptions options;
      options.manifest = bench_manifest;
      options.batch_size = bench_batch;
      options.iterations = iterations;
      resolve_m(options.config.m_policy, bench_batch);
      phase = Phase::Runtime;
      out << to_json(mixgen::bench(options)) << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return phase == Phase::Config && is_usage_code(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace mixgen::cli
