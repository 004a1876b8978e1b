#pragma once

#include "blurdiff/transform.hpp"

#include <span>

namespace blurdiff {

inline constexpr Index kMinSpectralSamples = 100;

/// Mean DCT power per frequency, averaged over images and channels.
Eigen::ArrayXXd mean_power(std::span<const Image> images);

struct SpectralReport {
  Index samples = 0;
  Index references = 0;
  Index low_frequencies = 0;
  Eigen::ArrayXXd sample_power;
  Eigen::ArrayXXd reference_power;
  /// max |P_s - P_r| / P_r over the `low_frequencies` lowest frequencies.
  double max_low_relative_deviation = 0.0;
  /// sqrt(mean over all frequencies of (ln P_s - ln P_r)^2).
  double log_spectral_distance = 0.0;
};

/// Compares sample and reference spectra. Both sets need at least
/// kMinSpectralSamples images of one shape.
SpectralReport compare_spectra(std::span<const Image> samples, std::span<const Image> reference,
                               Index low_frequencies);

}  // namespace blurdiff
