#include "mixgen/augment.hpp"

#include <algorithm>
#include <cmath>

#include "mixgen/detail/lerp.hpp"

namespace mixgen {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidLambda, "lambda " + std::to_string(lambda) + " outside [0,1]");
  }
}

constexpr BetaLambda kVariantBeta{0.1, 0.1};

BetaLambda beta_policy(const MixGenConfig& config) {
  if (const auto* beta = std::get_if<BetaLambda>(&config.lambda_policy)) return *beta;
  return kVariantBeta;
}

double fixed_lambda(const MixGenConfig& config) {
  if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda_policy)) return fixed->value;
  return 0.5;
}

TextSequence truncate(TextSequence text, const MixGenConfig& config, const Tokenizer& tokenizer) {
  if (!config.max_tokens) return text;
  auto tokens = text.tokens(tokenizer);
  if (tokens.size() <= *config.max_tokens) return text;
  tokens.resize(*config.max_tokens);
  return TextSequence::from_tokens(tokens);
}

}  // namespace

ImageTensor mix_images(const ImageTensor& a, const ImageTensor& b, double lambda) {
  check_lambda(lambda);
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
  if (lambda == 1.0) return a;
  if (lambda == 0.0) return b;
  std::vector<float> out(a.size());
  detail::lerp_bounded(a.data(), b.data(), static_cast<float>(lambda), out);
  return ImageTensor(ImageTensor::Unchecked{}, a.height(), a.width(), std::move(out));
}

TextSequence concat_text(const TextSequence& a, const TextSequence& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const std::string joined[] = {a.raw(), b.raw()};
  return TextSequence::from_tokens(joined);
}

std::size_t keep_count(std::size_t n, double keep_fraction) {
  if (n == 0 || !(keep_fraction > 0.0)) return 0;
  const auto rounded = static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(n) + 0.5));
  return std::clamp<std::size_t>(rounded, 1, n);
}

std::vector<std::string> token_subset(std::span<const std::string> tokens, double keep_fraction,
                                      RandomStream& rng) {
  check_lambda(keep_fraction);
  const std::size_t n = tokens.size();
  const std::size_t keep = keep_count(n, keep_fraction);
  if (keep == n) return {tokens.begin(), tokens.end()};
  std::vector<std::string> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < n && out.size() < keep; ++i) {
    if (rng.next_below(n - i) < keep - out.size()) out.push_back(tokens[i]);
  }
  return out;
}

LambdaDraw sample_lambda(const LambdaPolicy& policy, RandomStream& rng) {
  if (const auto* fixed = std::get_if<FixedLambda>(&policy)) {
    check_lambda(fixed->value);
    return {fixed->value, LambdaDraw::Source::Fixed};
  }
  const auto& beta = std::get<BetaLambda>(policy);
  return {sample_beta(beta.alpha, beta.beta, rng), LambdaDraw::Source::BetaSample};
}

PairPlan plan_pair(const TextSequence& ti, const TextSequence& tj, const MixGenConfig& config,
                   RandomStream& rng, const Tokenizer& tokenizer) {
  PairPlan plan;
  switch (config.variant) {
    case Variant::Default:
      plan.lambda = sample_lambda(config.lambda_policy, rng).value;
      plan.text = concat_text(ti, tj);
      break;
    case Variant::A:
      plan.lambda = sample_lambda(beta_policy(config), rng).value;
      plan.text = concat_text(ti, tj);
      break;
    case Variant::B:
      plan.lambda = fixed_lambda(config);
      plan.text = pick_uniform(ti, tj, rng);
      break;
    case Variant::C:
      plan.lambda = 0.5;
      plan.op = rng.next_bit() ? PairPlan::ImageOp::TakeSecond : PairPlan::ImageOp::TakeFirst;
      plan.text = concat_text(ti, tj);
      break;
    case Variant::D: {
      plan.lambda = sample_lambda(beta_policy(config), rng).value;
      auto kept = token_subset(ti.tokens(tokenizer), plan.lambda, rng);
      auto kept_j = token_subset(tj.tokens(tokenizer), 1.0 - plan.lambda, rng);
      kept.insert(kept.end(), std::make_move_iterator(kept_j.begin()), std::make_move_iterator(kept_j.end()));
      plan.text = TextSequence::from_tokens(kept);
      break;
    }
    case Variant::E: {
      plan.lambda = sample_lambda(beta_policy(config), rng).value;
      auto joined = ti.tokens(tokenizer);
      auto tail = tj.tokens(tokenizer);
      joined.insert(joined.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
      plan.text = TextSequence::from_tokens(token_subset(joined, 0.5, rng));
      break;
    }
  }
  plan.text = truncate(std::move(plan.text), config, tokenizer);
  return plan;
}

void render_image(const PairPlan& plan, std::span<const float> a, std::span<const float> b,
                  std::span<float> out) noexcept {
  switch (plan.op) {
    case PairPlan::ImageOp::TakeFirst:
      if (out.data() != a.data()) std::copy(a.begin(), a.end(), out.begin());
      return;
    case PairPlan::ImageOp::TakeSecond:
      if (out.data() != b.data()) std::copy(b.begin(), b.end(), out.begin());
      return;
    case PairPlan::ImageOp::Mix:
      break;
  }
  if (plan.lambda == 1.0) {
    if (out.data() != a.data()) std::copy(a.begin(), a.end(), out.begin());
  } else if (plan.lambda == 0.0) {
    if (out.data() != b.data()) std::copy(b.begin(), b.end(), out.begin());
  } else {
    detail::lerp_bounded(a, b, static_cast<float>(plan.lambda), out);
  }
}

AugmentedPair make_pair(const ImageTextPair& pi, const ImageTextPair& pj,
                        const MixGenConfig& config, RandomStream& rng,
                        const Tokenizer& tokenizer) {
  if (pi.id == pj.id) throw Error(ErrorCode::SelfMix, "cannot mix pair '" + pi.id + "' with itself");
  if (!pi.image.same_shape(pj.image)) {
    throw Error(ErrorCode::ShapeMismatch, "images of '" + pi.id + "' and '" + pj.id + "' differ");
  }
  auto plan = plan_pair(pi.text, pj.text, config, rng, tokenizer);
  check_lambda(plan.lambda);

  std::vector<float> pixels(pi.image.size());
  render_image(plan, pi.image.data(), pj.image.data(), pixels);

  AugmentedPair out;
  out.pair.id = pi.id + "|" + pj.id;
  out.pair.image = ImageTensor(ImageTensor::Unchecked{}, pi.image.height(), pi.image.width(), std::move(pixels));
  out.pair.text = std::move(plan.text);
  out.sources = {pi.id, pj.id};
  out.lambda_used = plan.lambda;
  out.variant_used = config.variant;
  return out;
}

}  // namespace mixgen
