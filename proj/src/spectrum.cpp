#include "blurdiff/spectrum.hpp"

#include <cmath>

namespace blurdiff {

Eigen::ArrayXXd mean_power(std::span<const Image> images) {
  if (images.empty()) throw ArgumentError("mean_power: no images");
  const Index n = images.front().size();
  const Index ch = images.front().channels();
  Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(n, n);
  for (const auto& img : images) {
    if (img.size() != n || img.channels() != ch) throw DimensionError("mean_power: images differ in shape");
    const Spectrum u = dct2(img);
    for (const auto& p : u.planes()) acc += p.array().square();
  }
  return acc / static_cast<double>(images.size() * static_cast<std::size_t>(ch));
}

SpectralReport compare_spectra(std::span<const Image> samples, std::span<const Image> reference,
                               Index low_frequencies) {
  if (static_cast<Index>(samples.size()) < kMinSpectralSamples ||
      static_cast<Index>(reference.size()) < kMinSpectralSamples) {
    throw ArgumentError("spectral comparison needs at least " + std::to_string(kMinSpectralSamples) +
                        " samples and reference images, got " + std::to_string(samples.size()) + " and " +
                        std::to_string(reference.size()));
  }
  if (samples.front().size() != reference.front().size() ||
      samples.front().channels() != reference.front().channels()) {
    throw DimensionError("samples and reference differ in shape");
  }
  if (low_frequencies < 1) throw ArgumentError("need at least one low frequency");

  SpectralReport r;
  r.samples = static_cast<Index>(samples.size());
  r.references = static_cast<Index>(reference.size());
  r.sample_power = mean_power(samples);
  r.reference_power = mean_power(reference);

  const FrequencyGrid grid(samples.front().size());
  const auto order = grid.ordered_by_frequency();
  r.low_frequencies = std::min<Index>(low_frequencies, static_cast<Index>(order.size()));
  for (Index k = 0; k < r.low_frequencies; ++k) {
    const auto [i, j] = order[static_cast<std::size_t>(k)];
    const double ref = r.reference_power(i, j);
    const double dev = ref > 0.0 ? std::abs(r.sample_power(i, j) - ref) / ref
                                 : (r.sample_power(i, j) > 0.0 ? INFINITY : 0.0);
    r.max_low_relative_deviation = std::max(r.max_low_relative_deviation, dev);
  }
  // Tiny floor so an all-zero frequency in both sets compares equal.
  constexpr double kFloor = 1e-300;
  const Eigen::ArrayXXd diff = (r.sample_power + kFloor).log() - (r.reference_power + kFloor).log();
  r.log_spectral_distance = std::sqrt(diff.square().mean());
  return r;
}

}  // namespace blurdiff
