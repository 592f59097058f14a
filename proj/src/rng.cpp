#include "mf/rng.h"

namespace mf {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi,
                    std::uint32_t &lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 2> split_key(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

} // namespace

std::array<std::uint32_t, 4>
Rng::philox_block(std::array<std::uint32_t, 4> c,
                  std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {}

void Rng::refill() {
  const auto s = split_key(stream_);
  buffer_ = philox_block({static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32), s[0], s[1]},
                         split_key(seed_));
  ++block_;
  pos_ = 0;
}

Rng::result_type Rng::operator()() {
  if (pos_ > 2)
    refill();
  const std::uint64_t lo = buffer_[pos_];
  const std::uint64_t hi = buffer_[pos_ + 1];
  pos_ += 2;
  return (hi << 32) | lo;
}

Rng Rng::split(std::uint64_t child) const {
  // Child stream ids come from one Philox block keyed by the seed, with the
  // counter holding (child, parent stream). The top bit marks derived ids so
  // they never collide with small user-chosen stream numbers.
  const auto c = split_key(child);
  const auto p = split_key(stream_);
  const auto out = philox_block({c[0], c[1], p[0], p[1]}, split_key(seed_));
  const std::uint64_t id =
      ((static_cast<std::uint64_t>(out[1]) << 32) | out[0]) | (1ull << 63);
  return Rng(seed_, id);
}

} // namespace mf
