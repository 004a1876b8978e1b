#pragma once

#include "blurdiff/denoiser.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blurdiff {

/// `literal` draws noise on every step including the last one; `mean`
/// returns the predicted clean image at the final step instead.
enum class LastStep { literal, mean };

std::string to_string(LastStep mode);
LastStep parse_last_step(std::string_view text);

struct SamplerConfig {
  Index steps = 1000;  // T
  std::uint64_t seed = 0;
  Index batch = 16;
  LastStep last_step = LastStep::literal;
  bool record_trajectory = false;
  Index trajectory_stride = 100;
  bool clip_xhat = false;  // experimental: clamp x-hat to [-1, 1] in pixel space

  void validate() const;
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficients of one reverse step t -> s = t - 1/T.
struct ReverseStep {
  Index index = 0;  // i for t = i / T
  DiffusionCoeffs at_t;
  PosteriorCoeffs posterior;
  Eigen::ArrayXXd noise_std;  // sqrt(sigma2_denoise)
};

/// Reverse-step table for t = T/T, ..., 1/T, computed once and shared.
std::vector<ReverseStep> reverse_schedule(Index steps, const FrequencyGrid& grid, const ScheduleParams& params);

struct Snapshot {
  double t = 1.0;
  std::vector<Image> batch;
};

/// Ancestral sampling from z_1 ~ N(0, I). Element b draws its initial latent
/// from stream (seed, sampler_init, b) and the noise of reverse step i from
/// (seed, sampler_step, b, i), so batch elements are independent of each
/// other and of the batch size.
std::vector<Image> sample(const Denoiser& denoiser, const SamplerConfig& config, const FrequencyGrid& grid,
                          const ScheduleParams& params);

/// As sample, recording the batch at t = 1 and after every `trajectory_stride`
/// steps; the final state is always recorded.
std::vector<Snapshot> sample_trajectory(const Denoiser& denoiser, const SamplerConfig& config,
                                        const FrequencyGrid& grid, const ScheduleParams& params);

}  // namespace blurdiff
