#include "vretrain/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "vretrain/errors.hpp"

namespace vretrain {

std::vector<long long> Schedule::counts() const {
  if (start < 1) throw Error(ErrorKind::InvalidArgument, "schedule start must be >= 1");
  std::vector<long long> out;
  out.reserve(rounds);
  switch (kind) {
    case ScheduleKind::Fixed:
      out.assign(rounds, start);
      break;
    case ScheduleKind::Linear: {
      if (!(end_or_ratio >= static_cast<double>(start))) {
        throw Error(ErrorKind::InvalidArgument, "linear schedule must not decrease");
      }
      const double step = rounds > 1 ? (end_or_ratio - start) / static_cast<double>(rounds - 1) : 0.0;
      for (std::size_t k = 0; k < rounds; ++k) {
        out.push_back(std::llround(static_cast<double>(start) + step * static_cast<double>(k)));
      }
      break;
    }
    case ScheduleKind::Geometric: {
      if (!(end_or_ratio >= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "geometric schedule ratio must be >= 1");
      }
      double value = static_cast<double>(start);
      for (std::size_t k = 0; k < rounds; ++k) {
        out.push_back(std::llround(value));
        value *= end_or_ratio;
      }
      break;
    }
  }
  return out;
}

std::vector<long long> Schedule::per_direction(std::size_t directions) const {
  if (directions == 0) throw Error(ErrorKind::InvalidArgument, "direction count must be positive");
  std::vector<long long> out = counts();
  if (counting == SampleCounting::Total) {
    for (auto& n : out) n = std::max<long long>(1, n / static_cast<long long>(directions));
  }
  return out;
}

}  // namespace vretrain
