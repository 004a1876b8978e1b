#pragma once

#include "blurdiff/network.hpp"
#include "blurdiff/schedule.hpp"

namespace blurdiff {

/// Noise predictor consumed by the sampler. Implementations receive the
/// schedule coefficients at the current time; `coeffs.t` is the time itself.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual Index size() const = 0;
  virtual Index channels() const = 0;

  virtual Image predict_eps(const Image& z_t, const DiffusionCoeffs& coeffs) const = 0;

  /// Frequency-space entry point used by the sampler loop.
  virtual Spectrum predict_eps_freq(const Spectrum& u_t, const DiffusionCoeffs& coeffs) const {
    return dct2(predict_eps(idct2(u_t), coeffs));
  }
};

/// Data distribution with independent Gaussian frequencies:
/// u_x ~ N(mean, diag(std^2)), shared by every channel.
struct GaussianDataPrior {
  Eigen::ArrayXXd mean;
  Eigen::ArrayXXd std;

  void validate() const;

  /// Zero mean, std_k = amplitude * (1 + lambda_k)^(-exponent).
  static GaussianDataPrior power_law(const FrequencyGrid& grid, double exponent, double amplitude = 1.0);
};

/// Exact E[u_x | u_t] for the Gaussian prior.
Spectrum oracle_posterior_x(const GaussianDataPrior& prior, const Spectrum& u_t, const DiffusionCoeffs& coeffs);
/// The noise prediction consistent with E[u_x | u_t].
Spectrum oracle_eps_freq(const GaussianDataPrior& prior, const Spectrum& u_t, const DiffusionCoeffs& coeffs);
Image oracle_eps(const GaussianDataPrior& prior, const Image& z_t, double t, const FrequencyGrid& grid,
                 const ScheduleParams& params);

class GaussianOracleDenoiser final : public Denoiser {
 public:
  GaussianOracleDenoiser(GaussianDataPrior prior, Index channels);

  Index size() const override { return prior_.mean.rows(); }
  Index channels() const override { return channels_; }
  Image predict_eps(const Image& z_t, const DiffusionCoeffs& coeffs) const override;
  Spectrum predict_eps_freq(const Spectrum& u_t, const DiffusionCoeffs& coeffs) const override;

  const GaussianDataPrior& prior() const { return prior_; }

 private:
  GaussianDataPrior prior_;
  Index channels_;
};

/// Closed-form prediction for zero-mean, unit-variance independent
/// frequencies: sigma u / (alpha^2 + sigma^2) for the noise, alpha u /
/// (alpha^2 + sigma^2) for the clean image. Networks learn a residual on top
/// of it; where a frequency is buried in noise it is already exact, which an
/// MLP cannot reproduce to the precision the reverse chain needs.
Image gaussian_skip(const Image& z_t, const DiffusionCoeffs& coeffs, Prediction target);

/// Adapts a trained network. x-predicting networks are converted to a noise
/// prediction with x_to_eps.
class NetworkDenoiser final : public Denoiser {
 public:
  explicit NetworkDenoiser(MlpDenoiser net) : net_(std::move(net)) {}

  Index size() const override { return net_.architecture().size; }
  Index channels() const override { return net_.architecture().channels; }
  Image predict_eps(const Image& z_t, const DiffusionCoeffs& coeffs) const override;

  const MlpDenoiser& network() const { return net_; }

 private:
  MlpDenoiser net_;
};

}  // namespace blurdiff
