#pragma once

#include "blurdiff/rng.hpp"
#include "blurdiff/tensor.hpp"

namespace testutil {

using blurdiff::Index;

inline blurdiff::Image random_image(std::uint32_t stream, Index channels, Index n, std::uint32_t sub = 0) {
  blurdiff::CounterRng rng(1234, blurdiff::StreamPurpose::test, stream, sub);
  return blurdiff::normal_image(rng, channels, n);
}

inline blurdiff::Spectrum random_spectrum(std::uint32_t stream, Index channels, Index n, std::uint32_t sub = 0) {
  return blurdiff::Spectrum(random_image(stream, channels, n, sub).planes());
}

template <typename T>
double max_abs_diff(const T& a, const T& b) {
  double m = 0.0;
  for (Index c = 0; c < a.channels(); ++c) m = std::max(m, static_cast<double>((a[c] - b[c]).cwiseAbs().maxCoeff()));
  return m;
}

}  // namespace testutil
