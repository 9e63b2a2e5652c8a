#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace yseg {

inline constexpr std::int64_t kNoSeed = std::numeric_limits<std::int64_t>::max() / 4;

/// Exact squared Euclidean distance from every pixel of an h×w grid to the
/// nearest nonzero pixel of `seeds` (separable lower-envelope method, one
/// pass over columns then one over rows). kNoSeed when there are no seeds.
std::vector<std::int64_t> squared_distance_transform(std::span<const std::uint8_t> seeds, int h,
                                                     int w);

}  // namespace yseg
