#pragma once

#include "blurdiff/schedule.hpp"

namespace blurdiff {

/// Forward sample z_t = V(alpha V^T x) + sigma eps. The noise is added in
/// pixel space because sigma is a scalar.
Image diffuse(const Image& x, const DiffusionCoeffs& coeffs, const Image& eps);
Image diffuse(const Image& x, double t, const Image& eps, const FrequencyGrid& grid,
              const ScheduleParams& params);

/// One forward transition s -> t. The noise is shaped per frequency, so it
/// passes through the DCT.
Image markov_step(const Image& z_s, const TransitionCoeffs& coeffs, const Image& eps);
Image markov_step(const Image& z_s, double s, double t, const Image& eps, const FrequencyGrid& grid,
                  const ScheduleParams& params);

// Conversions between the noise prediction and the data prediction.
Spectrum eps_to_x(const Spectrum& u_t, const Spectrum& u_eps, const DiffusionCoeffs& coeffs);
Spectrum x_to_eps(const Spectrum& u_t, const Spectrum& u_x, const DiffusionCoeffs& coeffs);

Image eps_to_x(const Image& z_t, const Image& eps_hat, const DiffusionCoeffs& coeffs);
Image eps_to_x(const Image& z_t, const Image& eps_hat, double t, const FrequencyGrid& grid,
               const ScheduleParams& params);
Image x_to_eps(const Image& z_t, const Image& x_hat, const DiffusionCoeffs& coeffs);
Image x_to_eps(const Image& z_t, const Image& x_hat, double t, const FrequencyGrid& grid,
               const ScheduleParams& params);

/// Mean of the denoising distribution p(u_s | u_t) in frequency space.
Spectrum posterior_mean(const Spectrum& u_t, const Spectrum& u_eps, const PosteriorCoeffs& coeffs);
Spectrum posterior_mean(const Image& z_t, const Image& eps_hat, const PosteriorCoeffs& coeffs);
Spectrum posterior_mean(const Image& z_t, const Image& eps_hat, double s, double t,
                        const FrequencyGrid& grid, const ScheduleParams& params);

/// q(z_t | x) in pixel space: N(V diag(alpha) V^T x, V diag(sigma^2) V^T).
struct PixelMarginal {
  Image mean;
  Eigen::ArrayXXd cov_spectrum;  // eigenvalues of the covariance in the DCT basis
  bool isotropic = true;         // covariance is sigma^2 I since sigma is shared
};

PixelMarginal pixel_space_marginal(const Image& x, const DiffusionCoeffs& coeffs);
PixelMarginal pixel_space_marginal(const Image& x, double t, const FrequencyGrid& grid,
                                   const ScheduleParams& params);

}  // namespace blurdiff
