#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace synprobe {

/// Exposure bucket: a range of training-corpus occurrence counts, labeled by
/// the upper end of the range.
struct ExposureBucket {
  int id;
  std::int64_t lo;
  std::int64_t hi;

  bool contains(std::int64_t count) const noexcept { return count >= lo && count <= hi; }
  friend bool operator==(const ExposureBucket&, const ExposureBucket&) = default;
};

inline constexpr std::array<ExposureBucket, 8> kExposureBuckets{{
    {2, 2, 2},
    {3, 3, 3},
    {4, 4, 4},
    {5, 5, 5},
    {10, 6, 10},
    {20, 11, 20},
    {30, 21, 30},
    {100, 50, 100},
}};

/// Counts of 0, 1, 31-49 and above 100 belong to no bucket.
std::optional<ExposureBucket> exposure_bucket(std::int64_t count) noexcept;

/// Bucket by label; nullopt if `id` is not one of the eight labels.
std::optional<ExposureBucket> bucket_by_id(int id) noexcept;

}  // namespace synprobe
