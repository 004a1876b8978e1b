#include "blurdiff/denoiser.hpp"

#include "blurdiff/diffusion.hpp"

namespace blurdiff {

void GaussianDataPrior::validate() const {
  if (mean.rows() != std.rows() || mean.cols() != std.cols() || mean.rows() != mean.cols()) {
    throw DimensionError("prior mean and std must be square grids of one size");
  }
  if (!(std > 0.0).all()) throw ArgumentError("prior std entries must be > 0");
}

GaussianDataPrior GaussianDataPrior::power_law(const FrequencyGrid& grid, double exponent, double amplitude) {
  GaussianDataPrior prior;
  prior.mean = Eigen::ArrayXXd::Zero(grid.size(), grid.size());
  prior.std = amplitude * (1.0 + grid.lambda()).pow(-exponent);
  return prior;
}

Spectrum oracle_posterior_x(const GaussianDataPrior& prior, const Spectrum& u_t, const DiffusionCoeffs& coeffs) {
  if (u_t.size() != prior.mean.rows()) throw DimensionError("oracle: prior size differs from input");
  const Eigen::ArrayXXd var = prior.std.square();
  const double sigma2 = coeffs.sigma * coeffs.sigma;
  const Eigen::ArrayXXd denom = coeffs.alpha.square() * var + sigma2;
  const Eigen::ArrayXXd gain = coeffs.alpha * var / denom;
  Spectrum out = u_t.scaled(gain);
  const Eigen::ArrayXXd offset = sigma2 * prior.mean / denom;
  for (auto& p : out.planes()) p.array() += offset;
  return out;
}

Spectrum oracle_eps_freq(const GaussianDataPrior& prior, const Spectrum& u_t, const DiffusionCoeffs& coeffs) {
  if (u_t.size() != prior.mean.rows()) throw DimensionError("oracle: prior size differs from input");
  // (u - alpha E[u_x | u]) / sigma simplifies to sigma (u - alpha mu) / (alpha^2 s^2 + sigma^2).
  const Eigen::ArrayXXd denom = coeffs.alpha.square() * prior.std.square() + coeffs.sigma * coeffs.sigma;
  const Eigen::ArrayXXd gain = coeffs.sigma / denom;
  Spectrum out = u_t.scaled(gain);
  const Eigen::ArrayXXd offset = gain * coeffs.alpha * prior.mean;
  for (auto& p : out.planes()) p.array() -= offset;
  return out;
}

Image oracle_eps(const GaussianDataPrior& prior, const Image& z_t, double t, const FrequencyGrid& grid,
                 const ScheduleParams& params) {
  return idct2(oracle_eps_freq(prior, dct2(z_t), alpha_sigma(t, grid, params)));
}

GaussianOracleDenoiser::GaussianOracleDenoiser(GaussianDataPrior prior, Index channels)
    : prior_(std::move(prior)), channels_(channels) {
  prior_.validate();
  if (channels < 1) throw ArgumentError("oracle: channels must be >= 1");
}

Image GaussianOracleDenoiser::predict_eps(const Image& z_t, const DiffusionCoeffs& coeffs) const {
  return idct2(oracle_eps_freq(prior_, dct2(z_t), coeffs));
}

Spectrum GaussianOracleDenoiser::predict_eps_freq(const Spectrum& u_t, const DiffusionCoeffs& coeffs) const {
  return oracle_eps_freq(prior_, u_t, coeffs);
}

Image gaussian_skip(const Image& z_t, const DiffusionCoeffs& coeffs, Prediction target) {
  const Eigen::ArrayXXd denom = coeffs.alpha.square() + coeffs.sigma * coeffs.sigma;
  const Eigen::ArrayXXd gain = target == Prediction::x ? Eigen::ArrayXXd(coeffs.alpha / denom)
                                                       : Eigen::ArrayXXd(coeffs.sigma / denom);
  return idct2(dct2(z_t).scaled(gain));
}

Image NetworkDenoiser::predict_eps(const Image& z_t, const DiffusionCoeffs& coeffs) const {
  const Architecture& arch = net_.architecture();
  Image skip;
  if (arch.gaussian_skip) skip = gaussian_skip(z_t, coeffs, arch.prediction);
  Image out = net_.forward(z_t, coeffs.t, arch.gaussian_skip ? &skip : nullptr);
  if (net_.architecture().prediction == Prediction::x) return x_to_eps(z_t, out, coeffs);
  return out;
}

}  // namespace blurdiff
