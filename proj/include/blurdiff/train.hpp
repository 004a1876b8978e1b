#pragma once

#include "blurdiff/dataset.hpp"
#include "blurdiff/network.hpp"
#include "blurdiff/schedule.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace blurdiff {

struct TrainConfig {
  double learning_rate = 2e-4;
  Index batch_size = 64;
  Index steps = 5000;
  std::uint64_t seed = 0;
  double ema_decay = 0.9999;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double divergence_threshold = 1e4;
  double loss_smoothing = 0.99;  // decay of the smoothed loss column

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t step = 0;
};

/// Bias-corrected adaptive-moment update, in place.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               const TrainConfig& config);

struct BatchLoss {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Monte-Carlo estimate of the unweighted denoising loss on `batch`: every
/// element draws t ~ U(0, 1) and eps ~ N(0, I) from the streams of
/// (seed, step, element), is diffused, and the squared error of the network
/// output against eps (or x for x-prediction) is averaged over batch and
/// pixels.
BatchLoss loss(const MlpDenoiser& model, std::span<const Image> batch, const FrequencyGrid& grid,
               const ScheduleParams& params, std::uint64_t seed, std::uint32_t step,
               bool with_gradient = true);

struct LossRecord {
  Index step = 0;
  double loss = 0.0;
  double ema_loss = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-threaded training loop with parameter EMA tracking.
class Trainer {
 public:
  Trainer(MlpDenoiser model, const Dataset& data, const FrequencyGrid& grid, ScheduleParams params,
          TrainConfig config);

  LossRecord step();
  void run(Index steps);

  const MlpDenoiser& model() const { return model_; }
  const Eigen::VectorXd& ema() const { return ema_; }
  const AdamState& optimizer() const { return opt_; }
  const std::vector<LossRecord>& history() const { return history_; }
  Index steps_done() const { return static_cast<Index>(history_.size()); }

 private:
  MlpDenoiser model_;
  const Dataset& data_;
  FrequencyGrid grid_;
  ScheduleParams params_;
  TrainConfig config_;
  Eigen::VectorXd ema_;
  AdamState opt_;
  std::vector<LossRecord> history_;
};

struct TrainResult {
  MlpDenoiser model;
  Eigen::VectorXd ema;
  AdamState optimizer;
  std::vector<LossRecord> history;
};

TrainResult train(MlpDenoiser model, const Dataset& data, const FrequencyGrid& grid,
                  const ScheduleParams& params, const TrainConfig& config);

/// Loss of a fixed model over `draws` evaluation samples, using a stream
/// disjoint from any training step.
double evaluate_loss(const MlpDenoiser& model, const Dataset& data, const FrequencyGrid& grid,
                     const ScheduleParams& params, std::uint64_t seed, Index draws);

}  // namespace blurdiff
