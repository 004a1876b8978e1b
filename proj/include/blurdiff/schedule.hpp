#pragma once

#include "blurdiff/transform.hpp"

#include <string>
#include <string_view>

namespace blurdiff {

enum class BlurShape { sin_squared, sin };

std::string to_string(BlurShape shape);
BlurShape parse_blur_shape(std::string_view text);

/// Lower bound used wherever a variance is divided by.
inline constexpr double kClipDelta = 1e-8;

struct ScheduleParams {
  double sigma_b_max = 20.0;  // blur std in pixels at t = 1
  double d_min = 0.001;
  double logsnr_min = -10.0;
  double logsnr_max = 10.0;
  BlurShape blur_shape = BlurShape::sin_squared;
  Index steps = 1000;  // sampler steps T
  Index size = 8;      // grid size N

  void validate() const;
  bool operator==(const ScheduleParams&) const = default;
};

struct NoiseLevels {
  double logsnr;
  double a;      // signal scale of the variance-preserving part
  double sigma;  // noise scale, shared by every frequency
};

/// Per-frequency marginal q(u_t | u_x) = N(alpha u_x, sigma^2 I).
struct DiffusionCoeffs {
  Eigen::ArrayXXd alpha;
  double sigma = 1.0;
  double t = 0.0;

  /// Per-frequency log(alpha^2 / sigma^2).
  Eigen::ArrayXXd logsnr() const { return (alpha.square() / (sigma * sigma)).log(); }
};

/// Forward Markov transition q(u_t | u_s).
struct TransitionCoeffs {
  Eigen::ArrayXXd alpha_ts;
  Eigen::ArrayXXd sigma2_ts;
  double s = 0.0;
  double t = 0.0;
};

/// Denoising posterior q(u_s | u_t, u_x) with the mean written as
/// coeff_zt * u_t + coeff_pred * (u_t - sigma_t * u_eps).
struct PosteriorCoeffs {
  Eigen::ArrayXXd sigma2_denoise;
  Eigen::ArrayXXd coeff_zt;
  Eigen::ArrayXXd coeff_pred;
  double sigma_t = 1.0;
  double s = 0.0;
  double t = 0.0;
};

double logsnr_cosine(double t, const ScheduleParams& params);
NoiseLevels noise_scaling_cosine(double t, const ScheduleParams& params);
double blur_sigma(double t, const ScheduleParams& params);
/// tau_t = sigma_B(t)^2 / 2.
double dissipation_time(double t, const ScheduleParams& params);
Eigen::ArrayXXd frequency_scaling(double t, const FrequencyGrid& grid, const ScheduleParams& params);
DiffusionCoeffs alpha_sigma(double t, const FrequencyGrid& grid, const ScheduleParams& params);

TransitionCoeffs transition_coeffs(const DiffusionCoeffs& at_s, const DiffusionCoeffs& at_t);
TransitionCoeffs transition_coeffs(double s, double t, const FrequencyGrid& grid,
                                   const ScheduleParams& params);

PosteriorCoeffs posterior_coeffs(const DiffusionCoeffs& at_s, const DiffusionCoeffs& at_t);
PosteriorCoeffs posterior_coeffs(double s, double t, const FrequencyGrid& grid,
                                 const ScheduleParams& params);

}  // namespace blurdiff
