#pragma once

#include <cstddef>
#include <vector>

namespace vretrain {

enum class ScheduleKind { Fixed, Linear, Geometric };

/// Whether schedule entries count verified samples across all directions
/// (split evenly, rounded down, at least one) or per direction.
enum class SampleCounting { Total, PerDirection };

/// Per-round verified sample counts.
///
/// Fixed repeats `start`; Linear interpolates from `start` to `end_or_ratio`
/// over `rounds` entries (rounded to nearest); Geometric multiplies `start`
/// by `end_or_ratio` each round (ratio >= 1, rounded to nearest).
struct Schedule {
  ScheduleKind kind = ScheduleKind::Fixed;
  long long start = 1;
  double end_or_ratio = 0.0;
  std::size_t rounds = 0;
  SampleCounting counting = SampleCounting::PerDirection;

  /// Validates and expands to `rounds` entries, each >= 1, non-decreasing.
  std::vector<long long> counts() const;

  /// Counts seen by each of `directions` directions.
  std::vector<long long> per_direction(std::size_t directions) const;

  bool operator==(const Schedule&) const = default;
};

}  // namespace vretrain
