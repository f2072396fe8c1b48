#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

namespace mixgen::detail {

// out[p] = w * a[p] + (1 - w) * b[p]. Spans must have equal length; `out`
// may be `a` or `b` itself but must not partially overlap either.
inline void lerp(std::span<const float> a, std::span<const float> b, float w,
                 std::span<float> out) noexcept {
  const float v = 1.0f - w;
  const float* pa = a.data();
  const float* pb = b.data();
  float* po = out.data();
  const std::size_t n = out.size();
  for (std::size_t p = 0; p < n; ++p) po[p] = w * pa[p] + v * pb[p];
}

// Same as `lerp` with each result clamped between its two inputs.
inline void lerp_bounded(std::span<const float> a, std::span<const float> b, float w,
                         std::span<float> out) noexcept {
  const float v = 1.0f - w;
  const float* pa = a.data();
  const float* pb = b.data();
  float* po = out.data();
  const std::size_t n = out.size();
  for (std::size_t p = 0; p < n; ++p) {
    const float x = pa[p];
    const float y = pb[p];
    const float r = w * x + v * y;
    po[p] = std::min(std::max(r, std::min(x, y)), std::max(x, y));
  }
}

}  // namespace mixgen::detail
