#include "blurdiff/sampler.hpp"

#include "blurdiff/diffusion.hpp"
#include "blurdiff/rng.hpp"

#include <sstream>

namespace blurdiff {

std::string to_string(LastStep mode) { return mode == LastStep::mean ? "mean" : "literal"; }

LastStep parse_last_step(std::string_view text) {
  if (text == "literal") return LastStep::literal;
  if (text == "mean") return LastStep::mean;
  throw ArgumentError("unknown last-step mode '" + std::string(text) + "' (expected literal or mean)");
}

void SamplerConfig::validate() const {
  if (steps < 1) throw ArgumentError("sampler: T must be >= 1");
  if (batch < 1) throw ArgumentError("sampler: batch must be >= 1");
  if (trajectory_stride < 1) throw ArgumentError("sampler: trajectory stride must be >= 1");
}

std::vector<ReverseStep> reverse_schedule(Index steps, const FrequencyGrid& grid, const ScheduleParams& params) {
  if (steps < 1) throw ArgumentError("reverse_schedule: T must be >= 1");
  std::vector<ReverseStep> table;
  table.reserve(static_cast<std::size_t>(steps));
  DiffusionCoeffs at_t = alpha_sigma(1.0, grid, params);
  for (Index i = steps; i >= 1; --i) {
    const double s = static_cast<double>(i - 1) / static_cast<double>(steps);
    DiffusionCoeffs at_s = alpha_sigma(s, grid, params);
    ReverseStep step;
    step.index = i;
    step.posterior = posterior_coeffs(at_s, at_t);
    step.noise_std = step.posterior.sigma2_denoise.sqrt();
    step.at_t = std::move(at_t);
    table.push_back(std::move(step));
    at_t = std::move(at_s);
  }
  return table;
}

namespace {

Spectrum clip_prediction(const Spectrum& u_t, const Spectrum& u_eps, const DiffusionCoeffs& at_t) {
  Image x_hat = idct2(eps_to_x(u_t, u_eps, at_t));
  for (auto& p : x_hat.planes()) p = p.cwiseMax(-1.0).cwiseMin(1.0);
  return x_to_eps(u_t, dct2(x_hat), at_t);
}

// Runs one batch element down the whole grid. `record` is called with the
// current frequency-space latent at t = 1 and after every reverse step.
template <typename Record>
Image run_chain(const Denoiser& denoiser, const SamplerConfig& config, const std::vector<ReverseStep>& table,
                std::uint32_t element, Record&& record) {
  const Index ch = denoiser.channels();
  const Index n = denoiser.size();
  CounterRng init(config.seed, StreamPurpose::sampler_init, element);
  Spectrum u = dct2(normal_image(init, ch, n));
  record(Index{0}, u);

  for (std::size_t k = 0; k < table.size(); ++k) {
    const ReverseStep& step = table[k];
    const bool last = k + 1 == table.size();
    Spectrum u_eps = denoiser.predict_eps_freq(u, step.at_t);
    if (config.clip_xhat) u_eps = clip_prediction(u, u_eps, step.at_t);

    if (last && config.last_step == LastStep::mean) {
      u = eps_to_x(u, u_eps, step.at_t);
    } else {
      Spectrum mu = posterior_mean(u, u_eps, step.posterior);
      CounterRng rng(config.seed, StreamPurpose::sampler_step, element, static_cast<std::uint32_t>(step.index));
      const Spectrum noise = dct2(normal_image(rng, ch, n));
      u = mu + noise.scaled(step.noise_std);
    }

    if (!u.all_finite()) {
      std::ostringstream msg;
      msg << "sampler produced a non-finite latent at step " << step.index << " (t=" << step.at_t.t
          << ", element " << element << "), max |u| = " << u.max_abs();
      throw SamplingError(msg.str());
    }
    record(static_cast<Index>(k + 1), u);
  }
  return idct2(u);
}

void check_inputs(const Denoiser& denoiser, const SamplerConfig& config, const FrequencyGrid& grid,
                  const ScheduleParams& params) {
  config.validate();
  params.validate();
  if (denoiser.size() != grid.size()) {
    throw DimensionError("denoiser works on N=" + std::to_string(denoiser.size()) + " but the grid has N=" +
                         std::to_string(grid.size()));
  }
}

}  // namespace

std::vector<Image> sample(const Denoiser& denoiser, const SamplerConfig& config, const FrequencyGrid& grid,
                          const ScheduleParams& params) {
  check_inputs(denoiser, config, grid, params);
  const auto table = reverse_schedule(config.steps, grid, params);
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(config.batch));
  for (Index b = 0; b < config.batch; ++b) {
    out.push_back(run_chain(denoiser, config, table, static_cast<std::uint32_t>(b), [](Index, const Spectrum&) {}));
  }
  return out;
}

std::vector<Snapshot> sample_trajectory(const Denoiser& denoiser, const SamplerConfig& config,
                                        const FrequencyGrid& grid, const ScheduleParams& params) {
  check_inputs(denoiser, config, grid, params);
  const auto table = reverse_schedule(config.steps, grid, params);
  const Index steps = config.steps;
  std::vector<Index> recorded;
  for (Index k = 0; k <= steps; ++k) {
    if (k % config.trajectory_stride == 0 || k == steps) recorded.push_back(k);
  }
  std::vector<Snapshot> snaps(recorded.size());
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    snaps[i].t = static_cast<double>(steps - recorded[i]) / static_cast<double>(steps);
    snaps[i].batch.reserve(static_cast<std::size_t>(config.batch));
  }
  for (Index b = 0; b < config.batch; ++b) {
    std::size_t next = 0;
    run_chain(denoiser, config, table, static_cast<std::uint32_t>(b), [&](Index k, const Spectrum& u) {
      if (next < recorded.size() && recorded[next] == k) snaps[next++].batch.push_back(idct2(u));
    });
  }
  return snaps;
}

}  // namespace blurdiff
