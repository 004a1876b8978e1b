#pragma once

#include "blurdiff/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blurdiff {

enum class Activation : std::uint8_t { silu = 0, tanh = 1 };
/// What the network output means: the injected noise or the clean image.
enum class Prediction : std::uint8_t { eps = 0, x = 1 };

std::string to_string(Activation a);
std::string to_string(Prediction p);
Activation parse_activation(std::string_view text);
Prediction parse_prediction(std::string_view text);

struct Architecture {
  Index size = 8;
  Index channels = 1;
  Index time_frequencies = 16;
  std::vector<Index> hidden = {256, 256};
  Activation activation = Activation::silu;
  Prediction prediction = Prediction::eps;
  /// Adds g * skip to the output, where skip is supplied by the caller and the
  /// gate g = kGateScale * (last parameter) starts at zero.
  bool gaussian_skip = true;

  Index pixel_dim() const { return channels * size * size; }
  Index input_dim() const { return pixel_dim() + 2 * time_frequencies; }
  Index parameter_count() const;
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

/// Sinusoidal features [sin(w_k t), cos(w_k t)] with w_k log-spaced over
/// [1, 1000] rad.
Eigen::VectorXd time_embedding(double t, Index frequencies);

/// Fully connected network f(z_t, t) on the flattened image concatenated
/// with the time embedding. Parameters live in one flat vector laid out as
/// (W_0, b_0, W_1, b_1, ..., [g]), each W column-major with shape (out, in);
/// the gate g is present when the architecture has a Gaussian skip.
class MlpDenoiser {
 public:
  /// All parameters zero.
  explicit MlpDenoiser(Architecture arch);

  /// Hidden layers drawn from N(0, 1/fan_in); the output layer stays zero so
  /// the initial prediction is exactly 0.
  static MlpDenoiser initialized(Architecture arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(const Eigen::VectorXd& params);

  /// Batched forward pass. `z` holds one flattened image per column; `skip`
  /// has the same shape and is required exactly when the architecture has a
  /// Gaussian skip.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& z, const Eigen::VectorXd& t,
                          const Eigen::MatrixXd* skip = nullptr) const;
  Image forward(const Image& z, double t, const Image* skip = nullptr) const;

  /// Mean over batch and outputs of (target - f(z, t))^2. When `gradient`
  /// is non-null it receives d loss / d parameters.
  double loss_and_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& t, const Eigen::MatrixXd& target,
                           Eigen::VectorXd* gradient, const Eigen::MatrixXd* skip = nullptr) const;

  /// Adam moves every parameter by about the learning rate per step; the
  /// scale lets the gate reach order one within a few hundred steps.
  static constexpr double kGateScale = 20.0;
  double gate() const { return arch_.gaussian_skip ? kGateScale * params_(params_.size() - 1) : 0.0; }

 private:
  struct LayerView {
    Index offset;
    Index in;
    Index out;
  };

  Eigen::MatrixXd inputs(const Eigen::MatrixXd& z, const Eigen::VectorXd& t) const;
  void check_skip(const Eigen::MatrixXd& z, const Eigen::MatrixXd* skip) const;

  Architecture arch_;
  std::vector<LayerView> layers_;
  Eigen::VectorXd params_;
};

}  // namespace blurdiff
