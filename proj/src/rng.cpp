#include "vretrain/rng.hpp"

#include <cmath>
#include <string>

#include "vretrain/errors.hpp"
#include "vretrain/normal.hpp"

namespace vretrain {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, StreamId id)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      id_lo_(static_cast<std::uint32_t>(id.replication)),
      id_hi_(static_cast<std::uint32_t>((id.round << 16) | id.direction)) {}

void RngStream::refill() noexcept {
  buffer_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        id_lo_, id_hi_},
                       key_);
  ++block_;
  position_ = 0;
}

RngStream::result_type RngStream::operator()() noexcept {
  if (position_ >= 4) refill();
  const std::uint64_t lo = buffer_[position_];
  const std::uint64_t hi = buffer_[position_ + 1];
  position_ += 2;
  return (hi << 32) | lo;
}

double RngStream::normal() noexcept { return normal_quantile(uniform_open()); }

double RngStream::exponential() noexcept { return -std::log(uniform_open()); }

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t round,
                        std::uint64_t direction) {
  if (replication > kMaxReplication || round > kMaxRound || direction > kMaxDirection) {
    throw Error(ErrorKind::SeedSpaceExhausted,
                "stream index (" + std::to_string(replication) + ", " + std::to_string(round) + ", " +
                    std::to_string(direction) + ") exceeds the 32/16/16-bit counter layout");
  }
  return RngStream(master_seed, StreamId{replication, round, direction});
}

}  // namespace vretrain
