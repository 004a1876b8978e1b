#include "blurdiff/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace blurdiff {
namespace {

void check_time(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ArgumentError(std::string(what) + ": t must lie in [0, 1], got " + std::to_string(t));
  }
}

void check_pair(double s, double t) {
  check_time(s, "s");
  check_time(t, "t");
  if (!(s < t)) throw ArgumentError("need s < t, got s=" + std::to_string(s) + " t=" + std::to_string(t));
}

// sigmoid(x) without overflow for large |x|.
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(BlurShape shape) {
  return shape == BlurShape::sin ? "sin" : "sin_squared";
}

BlurShape parse_blur_shape(std::string_view text) {
  if (text == "sin_squared" || text == "sin2") return BlurShape::sin_squared;
  if (text == "sin") return BlurShape::sin;
  throw ArgumentError("unknown blur shape '" + std::string(text) + "'");
}

void ScheduleParams::validate() const {
  if (!(sigma_b_max >= 0.0) || !std::isfinite(sigma_b_max)) throw ArgumentError("sigma_b_max must be >= 0");
  if (!(d_min > 0.0 && d_min < 1.0)) throw ArgumentError("d_min must lie in (0, 1)");
  if (!(logsnr_min < logsnr_max)) throw ArgumentError("logsnr_min must be < logsnr_max");
  if (steps < 1) throw ArgumentError("T must be >= 1");
  if (size < 1) throw ArgumentError("N must be >= 1");
}

double logsnr_cosine(double t, const ScheduleParams& params) {
  check_time(t, "noise_scaling_cosine");
  // The endpoints are pinned so the clipping limits hold exactly rather than
  // up to a tan(atan(.)) rounding error.
  if (t == 0.0) return params.logsnr_max;
  if (t == 1.0) return params.logsnr_min;
  const double limit_max = std::atan(std::exp(-0.5 * params.logsnr_max));
  const double limit_min = std::atan(std::exp(-0.5 * params.logsnr_min)) - limit_max;
  const double logsnr = -2.0 * std::log(std::tan(limit_min * t + limit_max));
  return std::clamp(logsnr, params.logsnr_min, params.logsnr_max);
}

NoiseLevels noise_scaling_cosine(double t, const ScheduleParams& params) {
  const double logsnr = logsnr_cosine(t, params);
  return {logsnr, std::sqrt(sigmoid(logsnr)), std::sqrt(sigmoid(-logsnr))};
}

double blur_sigma(double t, const ScheduleParams& params) {
  check_time(t, "blur_sigma");
  const double s = std::sin(t * std::numbers::pi / 2.0);
  return params.blur_shape == BlurShape::sin ? params.sigma_b_max * s : params.sigma_b_max * s * s;
}

double dissipation_time(double t, const ScheduleParams& params) {
  const double sb = blur_sigma(t, params);
  return 0.5 * sb * sb;
}

Eigen::ArrayXXd frequency_scaling(double t, const FrequencyGrid& grid, const ScheduleParams& params) {
  const double tau = dissipation_time(t, params);
  // d = (1 - d_min) exp(-lambda tau) + d_min, written with expm1 so that
  // lambda tau = 0 gives exactly 1.
  const Eigen::ArrayXXd decay = -(-grid.lambda() * tau).unaryExpr([](double v) { return std::expm1(v); });
  Eigen::ArrayXXd d = 1.0 - (1.0 - params.d_min) * decay;
  return d.max(params.d_min).min(1.0);
}

DiffusionCoeffs alpha_sigma(double t, const FrequencyGrid& grid, const ScheduleParams& params) {
  const NoiseLevels levels = noise_scaling_cosine(t, params);
  return {levels.a * frequency_scaling(t, grid, params), levels.sigma, t};
}

TransitionCoeffs transition_coeffs(const DiffusionCoeffs& at_s, const DiffusionCoeffs& at_t) {
  if (at_s.alpha.rows() != at_t.alpha.rows() || at_s.alpha.cols() != at_t.alpha.cols()) {
    throw DimensionError("transition_coeffs: coefficient grids differ");
  }
  if (!(at_s.t < at_t.t)) throw ArgumentError("transition_coeffs: need s < t");
  TransitionCoeffs out;
  out.alpha_ts = at_t.alpha / at_s.alpha;
  out.sigma2_ts = at_t.sigma * at_t.sigma - out.alpha_ts.square() * (at_s.sigma * at_s.sigma);
  out.s = at_s.t;
  out.t = at_t.t;
  return out;
}

TransitionCoeffs transition_coeffs(double s, double t, const FrequencyGrid& grid,
                                   const ScheduleParams& params) {
  check_pair(s, t);
  return transition_coeffs(alpha_sigma(s, grid, params), alpha_sigma(t, grid, params));
}

PosteriorCoeffs posterior_coeffs(const DiffusionCoeffs& at_s, const DiffusionCoeffs& at_t) {
  const TransitionCoeffs tr = transition_coeffs(at_s, at_t);
  const double raw_sigma2_s = at_s.sigma * at_s.sigma;
  const double sigma2_s = std::max(raw_sigma2_s, kClipDelta);
  const double sigma2_t = at_t.sigma * at_t.sigma;

  PosteriorCoeffs out;
  // Harmonic combination of the prior precision 1/sigma_s^2 and the
  // likelihood precision alpha_ts^2 / sigma2_ts.
  const Eigen::ArrayXXd lik_var = (sigma2_t / tr.alpha_ts.square() - raw_sigma2_s).max(kClipDelta);
  out.sigma2_denoise = 1.0 / (1.0 / sigma2_s + 1.0 / lik_var).max(kClipDelta);
  out.coeff_zt = tr.alpha_ts * out.sigma2_denoise / tr.sigma2_ts.max(kClipDelta);
  out.coeff_pred = out.sigma2_denoise / (tr.alpha_ts * sigma2_s);
  out.sigma_t = at_t.sigma;
  out.s = at_s.t;
  out.t = at_t.t;
  return out;
}

PosteriorCoeffs posterior_coeffs(double s, double t, const FrequencyGrid& grid,
                                 const ScheduleParams& params) {
  check_pair(s, t);
  return posterior_coeffs(alpha_sigma(s, grid, params), alpha_sigma(t, grid, params));
}

}  // namespace blurdiff
