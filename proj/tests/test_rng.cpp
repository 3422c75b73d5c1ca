#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "vretrain/errors.hpp"
#include "vretrain/rng.hpp"

using namespace vretrain;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using Block = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("derive_stream is a pure function of its indices") {
  RngStream a = derive_stream(42, 3, 7, 1);
  RngStream b = derive_stream(42, 3, 7, 1);
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("distinct indices give distinct streams") {
  const std::vector<std::array<std::uint64_t, 4>> ids = {
      {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 0, 1}, {2, 0, 0, 0}, {1, kMaxReplication, 0, 0},
      {1, 0, kMaxRound, 0}, {1, 0, 0, kMaxDirection}};
  std::set<std::uint64_t> seen;
  for (const auto& id : ids) {
    RngStream s = derive_stream(id[0], id[1], id[2], id[3]);
    for (int i = 0; i < 10000; ++i) CHECK(seen.insert(s()).second);
  }
}

TEST_CASE("two replications differ over the first 10^4 outputs") {
  RngStream a = derive_stream(7, 0);
  RngStream b = derive_stream(7, 1);
  int equal = 0;
  for (int i = 0; i < 10000; ++i) equal += a() == b();
  CHECK(equal == 0);
}

TEST_CASE("indices beyond their fields are rejected") {
  for (auto f : {+[] { derive_stream(0, kMaxReplication + 1); }, +[] { derive_stream(0, 0, kMaxRound + 1); },
                 +[] { derive_stream(0, 0, 0, kMaxDirection + 1); }}) {
    try {
      f();
      FAIL("expected seed-space-exhausted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SeedSpaceExhausted);
    }
  }
}

TEST_CASE("uniform and normal draws") {
  RngStream s = derive_stream(11, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0, usum = 0.0, esum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform_open();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    usum += u;
    const double z = s.normal();
    sum += z;
    sum_sq += z * z;
    esum += s.exponential();
  }
  CHECK(std::abs(usum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum_sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(esum / n - 1.0) < 5.0 / std::sqrt(n));
}

TEST_CASE("stream satisfies the standard bit generator contract") {
  static_assert(std::uniform_random_bit_generator<RngStream>);
  RngStream s = derive_stream(1, 2, 3, 4);
  CHECK(s.blocks_consumed() == 0);
  s();
  s();
  CHECK(s.blocks_consumed() == 1);
  s();
  CHECK(s.blocks_consumed() == 2);
}
