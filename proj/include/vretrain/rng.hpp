#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace vretrain {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 128-bit counter and 64-bit key to 128 bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Coordinates of an independent substream inside one experiment.
///
/// Field widths are fixed by the counter layout: replication uses 32 bits,
/// round and direction 16 bits each. derive_stream rejects anything wider.
struct StreamId {
  std::uint64_t replication = 0;
  std::uint64_t round = 0;
  std::uint64_t direction = 0;
};

inline constexpr std::uint64_t kMaxReplication = 0xFFFFFFFFull;
inline constexpr std::uint64_t kMaxRound = 0xFFFFull;
inline constexpr std::uint64_t kMaxDirection = 0xFFFFull;

/// Reserved replication index for experiment-wide draws (design matrix,
/// the random offset direction of the verifier centre).
inline constexpr std::uint64_t kExperimentReplication = kMaxReplication;

/// Counter-based stream: the key is the master seed, the upper 64 counter
/// bits hold the StreamId, the lower 64 bits count blocks. Distinct ids
/// therefore never share a counter value.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, StreamId id);

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal draw by inversion of a single open uniform.
  double normal() noexcept;

  /// Exponential(1) draw.
  double exponential() noexcept;

  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_{};
  std::uint32_t id_lo_ = 0;
  std::uint32_t id_hi_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int position_ = 4;
};

/// Pure function from (master seed, indices) to an independent stream.
/// Throws Error{SeedSpaceExhausted} when an index does not fit its field.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t replication,
                        std::uint64_t round = 0, std::uint64_t direction = 0);

}  // namespace vretrain
