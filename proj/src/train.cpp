#include "blurdiff/train.hpp"

#include "blurdiff/denoiser.hpp"
#include "blurdiff/diffusion.hpp"
#include "blurdiff/rng.hpp"

#include <cmath>
#include <sstream>

namespace blurdiff {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be > 0");
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (steps < 0) throw ArgumentError("steps must be >= 0");
  if (!(ema_decay >= 0.0 && ema_decay <= 1.0)) throw ArgumentError("ema decay must lie in [0, 1]");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ArgumentError("Adam betas must lie in [0, 1)");
  if (!(loss_smoothing >= 0.0 && loss_smoothing < 1.0)) throw ArgumentError("loss smoothing must lie in [0, 1)");
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               const TrainConfig& config) {
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * gradient;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * gradient.cwiseAbs2();
  const double step = static_cast<double>(state.step);
  const double m_corr = 1.0 / (1.0 - std::pow(config.beta1, step));
  const double v_corr = 1.0 / (1.0 - std::pow(config.beta2, step));
  params.array() -= config.learning_rate * (state.m.array() * m_corr) /
                    ((state.v.array() * v_corr).sqrt() + config.adam_epsilon);
}

BatchLoss loss(const MlpDenoiser& model, std::span<const Image> batch, const FrequencyGrid& grid,
               const ScheduleParams& params, std::uint64_t seed, std::uint32_t step, bool with_gradient) {
  if (batch.empty()) throw ArgumentError("loss: empty batch");
  const Architecture& arch = model.architecture();
  const auto b = static_cast<Index>(batch.size());
  Eigen::MatrixXd z(arch.pixel_dim(), b);
  Eigen::MatrixXd target(arch.pixel_dim(), b);
  Eigen::MatrixXd skip(arch.gaussian_skip ? arch.pixel_dim() : 0, b);
  Eigen::VectorXd t(b);
  for (Index i = 0; i < b; ++i) {
    const Image& x = batch[static_cast<std::size_t>(i)];
    if (x.size() != arch.size || x.channels() != arch.channels) {
      throw DimensionError("loss: batch image shape does not match the network");
    }
    const auto element = static_cast<std::uint32_t>(i);
    CounterRng time_rng(seed, StreamPurpose::train_time, step, element);
    CounterRng noise_rng(seed, StreamPurpose::train_noise, step, element);
    t(i) = time_rng.uniform();
    const Image eps = normal_image(noise_rng, arch.channels, arch.size);
    const DiffusionCoeffs coeffs = alpha_sigma(t(i), grid, params);
    const Image zi = diffuse(x, coeffs, eps);
    z.col(i) = zi.flatten();
    if (arch.gaussian_skip) skip.col(i) = gaussian_skip(zi, coeffs, arch.prediction).flatten();
    target.col(i) = arch.prediction == Prediction::x ? x.flatten() : eps.flatten();
  }
  BatchLoss out;
  out.loss = model.loss_and_gradient(z, t, target, with_gradient ? &out.gradient : nullptr,
                                     arch.gaussian_skip ? &skip : nullptr);
  return out;
}

Trainer::Trainer(MlpDenoiser model, const Dataset& data, const FrequencyGrid& grid, ScheduleParams params,
                 TrainConfig config)
    : model_(std::move(model)), data_(data), grid_(grid), params_(params), config_(config) {
  config_.validate();
  data_.validate();
  if (data_.count() == 0) throw ArgumentError("training needs a non-empty dataset");
  if (data_.size != model_.architecture().size || data_.channels != model_.architecture().channels) {
    throw DimensionError("dataset shape does not match the network architecture");
  }
  ema_ = model_.parameters();
}

LossRecord Trainer::step() {
  const auto step_index = static_cast<std::uint32_t>(history_.size());
  CounterRng index_rng(config_.seed, StreamPurpose::train_index, step_index);
  std::vector<Image> batch;
  batch.reserve(static_cast<std::size_t>(config_.batch_size));
  for (Index i = 0; i < config_.batch_size; ++i) {
    batch.push_back(data_.images[index_rng.below(static_cast<std::uint64_t>(data_.count()))]);
  }

  BatchLoss result = loss(model_, batch, grid_, params_, config_.seed, step_index);
  if (!std::isfinite(result.loss) || result.loss > config_.divergence_threshold) {
    std::ostringstream msg;
    msg << "training diverged at step " << step_index << ": loss " << result.loss << " exceeds "
        << config_.divergence_threshold;
    throw TrainingDiverged(msg.str());
  }

  Eigen::VectorXd p = model_.parameters();
  adam_step(p, result.gradient, opt_, config_);
  model_.set_parameters(p);
  ema_ = config_.ema_decay * ema_ + (1.0 - config_.ema_decay) * p;

  LossRecord rec;
  rec.step = static_cast<Index>(step_index);
  rec.loss = result.loss;
  rec.ema_loss = history_.empty()
                     ? result.loss
                     : config_.loss_smoothing * history_.back().ema_loss + (1.0 - config_.loss_smoothing) * result.loss;
  history_.push_back(rec);
  return rec;
}

void Trainer::run(Index steps) {
  for (Index i = 0; i < steps; ++i) step();
}

TrainResult train(MlpDenoiser model, const Dataset& data, const FrequencyGrid& grid,
                  const ScheduleParams& params, const TrainConfig& config) {
  Trainer trainer(std::move(model), data, grid, params, config);
  trainer.run(config.steps);
  return {trainer.model(), trainer.ema(), trainer.optimizer(), trainer.history()};
}

double evaluate_loss(const MlpDenoiser& model, const Dataset& data, const FrequencyGrid& grid,
                     const ScheduleParams& params, std::uint64_t seed, Index draws) {
  if (data.count() == 0 || draws < 1) throw ArgumentError("evaluate_loss: need data and draws >= 1");
  constexpr Index kChunk = 1024;
  double total = 0.0;
  Index done = 0;
  for (std::uint32_t chunk = 0; done < draws; ++chunk) {
    const Index n = std::min(kChunk, draws - done);
    std::vector<Image> batch;
    batch.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) batch.push_back(data.images[static_cast<std::size_t>((done + i) % data.count())]);
    // Evaluation streams count down from the top of the step range.
    const BatchLoss l = loss(model, batch, grid, params, seed, 0xFFFFFFFFu - chunk, false);
    total += l.loss * static_cast<double>(n);
    done += n;
  }
  return total / static_cast<double>(draws);
}

}  // namespace blurdiff
