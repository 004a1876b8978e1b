#pragma once

#include "blurdiff/tensor.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace blurdiff {

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Purpose tags occupy counter word 1 so different consumers of the same seed
/// never share a block.
enum class StreamPurpose : std::uint32_t {
  sampler_init = 1,
  sampler_step = 2,
  train_index = 3,
  train_time = 4,
  train_noise = 5,
  dataset = 6,
  test = 7,
  network_init = 8,
};

/// One independent stream of variates. Block b of stream (seed, purpose, a, b')
/// is philox(counter = {b, purpose, a, b'}, key = {seed_lo, seed_hi}).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint32_t index_a = 0,
             std::uint32_t index_b = 0);

  /// Next 4 raw words (one Philox block).
  PhiloxCounter next_block();

  /// Uniform in the open interval (0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; each block yields one pair.
  double normal();

  /// Uniform integer in [0, bound) via a 64-bit multiply-shift.
  std::uint64_t below(std::uint64_t bound);

  void fill_normal(std::span<double> out);

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter base_;
  std::uint32_t block_ = 0;
  std::array<double, 2> uniforms_{};
  int uniform_pos_ = 2;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Standard-normal image drawn from the given stream, filled in
/// (channel, row, col) row-major order.
Image normal_image(CounterRng& rng, Index channels, Index size);

}  // namespace blurdiff
