#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace mf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the Philox key; the 128-bit counter is split into a
/// 64-bit block index and a 64-bit stream id. `split(i)` derives a child
/// stream whose output is a pure function of (seed, parent stream, i), so
/// work distributed over child streams is reproducible regardless of how many
/// threads execute it.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  Rng split(std::uint64_t child) const;

  /// Standard normal variate.
  double normal() { return normal_(*this); }
  /// Uniform variate in [0, 1).
  double uniform() { return uniform_(*this); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4>
  philox_block(std::array<std::uint32_t, 4> counter,
               std::array<std::uint32_t, 2> key);

private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_ = 4;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

} // namespace mf
