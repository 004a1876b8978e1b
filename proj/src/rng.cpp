#include "blurdiff/rng.hpp"

#include <cmath>
#include <numbers>

namespace blurdiff {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double to_unit(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

CounterRng::CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint32_t index_a,
                       std::uint32_t index_b)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      base_{0u, static_cast<std::uint32_t>(purpose), index_a, index_b} {}

PhiloxCounter CounterRng::next_block() {
  PhiloxCounter c = base_;
  c[0] = block_++;
  return philox4x32_10(c, key_);
}

void CounterRng::refill() {
  const PhiloxCounter b = next_block();
  uniforms_[0] = to_unit((static_cast<std::uint64_t>(b[1]) << 32) | b[0]);
  uniforms_[1] = to_unit((static_cast<std::uint64_t>(b[3]) << 32) | b[2]);
  uniform_pos_ = 0;
}

double CounterRng::uniform() {
  if (uniform_pos_ >= 2) refill();
  return uniforms_[static_cast<std::size_t>(uniform_pos_++)];
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Both uniforms of one block feed a single Box-Muller pair.
  refill();
  uniform_pos_ = 2;
  const double r = std::sqrt(-2.0 * std::log(uniforms_[0]));
  const double theta = 2.0 * std::numbers::pi * uniforms_[1];
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("CounterRng::below: bound must be positive");
  const PhiloxCounter b = next_block();
  const std::uint64_t w = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(w) * bound) >> 64);
}

void CounterRng::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

Image normal_image(CounterRng& rng, Index channels, Index size) {
  Image out(channels, size);
  for (Index c = 0; c < channels; ++c) {
    for (Index r = 0; r < size; ++r) {
      for (Index k = 0; k < size; ++k) out(c, r, k) = rng.normal();
    }
  }
  return out;
}

}  // namespace blurdiff
