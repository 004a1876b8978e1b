#include "blurdiff/diffusion.hpp"

namespace blurdiff {
namespace {

void require_grid(const Image& x, const Eigen::ArrayXXd& coeffs) {
  if (x.size() != coeffs.rows() || coeffs.rows() != coeffs.cols()) {
    throw DimensionError("image size " + std::to_string(x.size()) + " does not match coefficient grid " +
                         std::to_string(coeffs.rows()));
  }
}

template <typename A, typename B>
void require_same(const A& a, const B& b, const char* what) {
  if (a.channels() != b.channels() || a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

Image diffuse(const Image& x, const DiffusionCoeffs& coeffs, const Image& eps) {
  require_same(x, eps, "diffuse");
  require_grid(x, coeffs.alpha);
  return idct2(dct2(x).scaled(coeffs.alpha)) + coeffs.sigma * eps;
}

Image diffuse(const Image& x, double t, const Image& eps, const FrequencyGrid& grid,
              const ScheduleParams& params) {
  return diffuse(x, alpha_sigma(t, grid, params), eps);
}

Image markov_step(const Image& z_s, const TransitionCoeffs& coeffs, const Image& eps) {
  require_same(z_s, eps, "markov_step");
  require_grid(z_s, coeffs.alpha_ts);
  const Eigen::ArrayXXd noise_scale = coeffs.sigma2_ts.max(0.0).sqrt();
  return idct2(dct2(z_s).scaled(coeffs.alpha_ts) + dct2(eps).scaled(noise_scale));
}

Image markov_step(const Image& z_s, double s, double t, const Image& eps, const FrequencyGrid& grid,
                  const ScheduleParams& params) {
  return markov_step(z_s, transition_coeffs(s, t, grid, params), eps);
}

Spectrum eps_to_x(const Spectrum& u_t, const Spectrum& u_eps, const DiffusionCoeffs& coeffs) {
  require_same(u_t, u_eps, "eps_to_x");
  return (u_t - coeffs.sigma * u_eps).scaled(coeffs.alpha.inverse());
}

Spectrum x_to_eps(const Spectrum& u_t, const Spectrum& u_x, const DiffusionCoeffs& coeffs) {
  require_same(u_t, u_x, "x_to_eps");
  return (u_t - u_x.scaled(coeffs.alpha)) * (1.0 / coeffs.sigma);
}

Image eps_to_x(const Image& z_t, const Image& eps_hat, const DiffusionCoeffs& coeffs) {
  require_grid(z_t, coeffs.alpha);
  return idct2(eps_to_x(dct2(z_t), dct2(eps_hat), coeffs));
}

Image eps_to_x(const Image& z_t, const Image& eps_hat, double t, const FrequencyGrid& grid,
               const ScheduleParams& params) {
  return eps_to_x(z_t, eps_hat, alpha_sigma(t, grid, params));
}

Image x_to_eps(const Image& z_t, const Image& x_hat, const DiffusionCoeffs& coeffs) {
  require_grid(z_t, coeffs.alpha);
  return idct2(x_to_eps(dct2(z_t), dct2(x_hat), coeffs));
}

Image x_to_eps(const Image& z_t, const Image& x_hat, double t, const FrequencyGrid& grid,
               const ScheduleParams& params) {
  return x_to_eps(z_t, x_hat, alpha_sigma(t, grid, params));
}

Spectrum posterior_mean(const Spectrum& u_t, const Spectrum& u_eps, const PosteriorCoeffs& coeffs) {
  require_same(u_t, u_eps, "posterior_mean");
  return u_t.scaled(coeffs.coeff_zt) + (u_t - coeffs.sigma_t * u_eps).scaled(coeffs.coeff_pred);
}

Spectrum posterior_mean(const Image& z_t, const Image& eps_hat, const PosteriorCoeffs& coeffs) {
  require_grid(z_t, coeffs.coeff_zt);
  return posterior_mean(dct2(z_t), dct2(eps_hat), coeffs);
}

Spectrum posterior_mean(const Image& z_t, const Image& eps_hat, double s, double t,
                        const FrequencyGrid& grid, const ScheduleParams& params) {
  return posterior_mean(z_t, eps_hat, posterior_coeffs(s, t, grid, params));
}

PixelMarginal pixel_space_marginal(const Image& x, const DiffusionCoeffs& coeffs) {
  require_grid(x, coeffs.alpha);
  PixelMarginal out;
  out.mean = idct2(dct2(x).scaled(coeffs.alpha));
  out.cov_spectrum = Eigen::ArrayXXd::Constant(coeffs.alpha.rows(), coeffs.alpha.cols(),
                                               coeffs.sigma * coeffs.sigma);
  out.isotropic = true;
  return out;
}

PixelMarginal pixel_space_marginal(const Image& x, double t, const FrequencyGrid& grid,
                                   const ScheduleParams& params) {
  return pixel_space_marginal(x, alpha_sigma(t, grid, params));
}

}  // namespace blurdiff
