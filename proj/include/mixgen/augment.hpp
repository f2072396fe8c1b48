#pragma once

#include <span>
#include <string>
#include <vector>

#include "mixgen/core_types.hpp"
#include "mixgen/random.hpp"

namespace mixgen {

struct LambdaDraw {
  enum class Source { Fixed, BetaSample };
  double value = 0.5;
  Source source = Source::Fixed;
};

/// Pixelwise lambda * a + (1 - lambda) * b. Each output sample is clamped to
/// the closed range spanned by its two inputs, so rounding can never leave
/// [0, 1]. lambda == 1 and lambda == 0 return exact copies.
ImageTensor mix_images(const ImageTensor& a, const ImageTensor& b, double lambda);

/// `a`, one space, `b`. An empty side yields the other side unchanged.
TextSequence concat_text(const TextSequence& a, const TextSequence& b);

/// Number of tokens kept out of `n` for `keep_fraction`: round-half-up of
/// keep_fraction * n, with a floor of one when n > 0 and keep_fraction > 0.
std::size_t keep_count(std::size_t n, double keep_fraction);

/// Uniform order-preserving subset of `keep_count(tokens.size(), keep_fraction)`
/// tokens (selection sampling, one bounded draw per visited token).
std::vector<std::string> token_subset(std::span<const std::string> tokens, double keep_fraction,
                                      RandomStream& rng);

LambdaDraw sample_lambda(const LambdaPolicy& policy, RandomStream& rng);

template <typename T>
const T& pick_uniform(const T& a, const T& b, RandomStream& rng) {
  return rng.next_bit() ? b : a;
}

/// Everything about a generated pair except the pixels: lambda, how the image
/// is formed, and the final text.
struct PairPlan {
  enum class ImageOp { Mix, TakeFirst, TakeSecond };
  ImageOp op = ImageOp::Mix;
  double lambda = 0.5;
  TextSequence text;
};

/// Draws everything `make_pair` needs from `rng`, in the documented order.
PairPlan plan_pair(const TextSequence& ti, const TextSequence& tj, const MixGenConfig& config,
                   RandomStream& rng, const Tokenizer& tokenizer = whitespace_tokenize);

/// Applies the image half of `plan` to raw HWC buffers of equal length.
/// `out` may be the same buffer as `a` or `b`.
void render_image(const PairPlan& plan, std::span<const float> a, std::span<const float> b,
                  std::span<float> out) noexcept;

/// Generates one new pair from (pi, pj) according to `config.variant`.
///
/// Stream consumption order is fixed: the lambda draw first, then any uniform
/// pick, then token subsets (T_i before T_j). Variants A, D and E draw lambda
/// from the configured Beta policy, or Beta(0.1, 0.1) when the policy is
/// fixed. Variant B mixes at the configured fixed lambda (0.5 when the policy
/// is Beta). Variant C records lambda 0.5 as a placeholder.
AugmentedPair make_pair(const ImageTextPair& pi, const ImageTextPair& pj,
                        const MixGenConfig& config, RandomStream& rng,
                        const Tokenizer& tokenizer = whitespace_tokenize);

}  // namespace mixgen
