#include "synprobe/exposure.hpp"

namespace synprobe {

std::optional<ExposureBucket> exposure_bucket(std::int64_t count) noexcept {
  for (const auto& b : kExposureBuckets)
    if (b.contains(count)) return b;
  return std::nullopt;
}

std::optional<ExposureBucket> bucket_by_id(int id) noexcept {
  for (const auto& b : kExposureBuckets)
    if (b.id == id) return b;
  return std::nullopt;
}

}  // namespace synprobe
