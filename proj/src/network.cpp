#include "blurdiff/network.hpp"

#include "blurdiff/rng.hpp"

#include <cmath>

namespace blurdiff {
namespace {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::MatrixXd activate(const Eigen::MatrixXd& h, Activation a) {
  if (a == Activation::tanh) return h.array().tanh().matrix();
  return h.unaryExpr([](double x) { return x * sigmoid(x); });
}

Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& h, Activation a) {
  if (a == Activation::tanh) return (1.0 - h.array().tanh().square()).matrix();
  return h.unaryExpr([](double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
  });
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "silu"; }
std::string to_string(Prediction p) { return p == Prediction::x ? "x" : "eps"; }

Activation parse_activation(std::string_view text) {
  if (text == "silu") return Activation::silu;
  if (text == "tanh") return Activation::tanh;
  throw ArgumentError("unknown activation '" + std::string(text) + "'");
}

Prediction parse_prediction(std::string_view text) {
  if (text == "eps") return Prediction::eps;
  if (text == "x") return Prediction::x;
  throw ArgumentError("unknown prediction target '" + std::string(text) + "'");
}

Index Architecture::parameter_count() const {
  Index count = 0;
  Index in = input_dim();
  for (Index width : hidden) {
    count += width * in + width;
    in = width;
  }
  return count + pixel_dim() * in + pixel_dim() + (gaussian_skip ? 1 : 0);
}

void Architecture::validate() const {
  if (size < 1 || channels < 1) throw ArgumentError("architecture: size and channels must be >= 1");
  if (time_frequencies < 1) throw ArgumentError("architecture: need at least one time frequency");
  for (Index width : hidden) {
    if (width < 1) throw ArgumentError("architecture: hidden widths must be >= 1");
  }
}

Eigen::VectorXd time_embedding(double t, Index frequencies) {
  Eigen::VectorXd e(2 * frequencies);
  const double log_max = std::log(1000.0);
  for (Index k = 0; k < frequencies; ++k) {
    const double frac = frequencies > 1 ? static_cast<double>(k) / static_cast<double>(frequencies - 1) : 0.0;
    const double w = std::exp(frac * log_max);
    e(k) = std::sin(w * t);
    e(frequencies + k) = std::cos(w * t);
  }
  return e;
}

MlpDenoiser::MlpDenoiser(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  Index offset = 0;
  Index in = arch_.input_dim();
  for (Index width : arch_.hidden) {
    layers_.push_back({offset, in, width});
    offset += width * in + width;
    in = width;
  }
  layers_.push_back({offset, in, arch_.pixel_dim()});
  params_ = Eigen::VectorXd::Zero(arch_.parameter_count());
}

MlpDenoiser MlpDenoiser::initialized(Architecture arch, std::uint64_t seed) {
  MlpDenoiser net(std::move(arch));
  CounterRng rng(seed, StreamPurpose::network_init);
  for (std::size_t l = 0; l + 1 < net.layers_.size(); ++l) {
    const LayerView& layer = net.layers_[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (Index k = 0; k < layer.in * layer.out; ++k) net.params_(layer.offset + k) = scale * rng.normal();
  }
  return net;
}

void MlpDenoiser::set_parameters(const Eigen::VectorXd& params) {
  if (params.size() != params_.size()) {
    throw DimensionError("parameter vector has " + std::to_string(params.size()) + " entries, expected " +
                         std::to_string(params_.size()));
  }
  params_ = params;
}

Eigen::MatrixXd MlpDenoiser::inputs(const Eigen::MatrixXd& z, const Eigen::VectorXd& t) const {
  if (z.rows() != arch_.pixel_dim()) throw DimensionError("network input has the wrong pixel count");
  if (z.cols() != t.size()) throw DimensionError("network batch and time vector lengths differ");
  Eigen::MatrixXd in(arch_.input_dim(), z.cols());
  in.topRows(arch_.pixel_dim()) = z;
  for (Index b = 0; b < z.cols(); ++b) {
    in.col(b).bottomRows(2 * arch_.time_frequencies) = time_embedding(t(b), arch_.time_frequencies);
  }
  return in;
}

void MlpDenoiser::check_skip(const Eigen::MatrixXd& z, const Eigen::MatrixXd* skip) const {
  if (arch_.gaussian_skip && skip == nullptr) throw ArgumentError("network has a Gaussian skip but none was given");
  if (!arch_.gaussian_skip && skip != nullptr) throw ArgumentError("network has no Gaussian skip");
  if (skip != nullptr && (skip->rows() != z.rows() || skip->cols() != z.cols())) {
    throw DimensionError("skip term shape differs from the input");
  }
}

Eigen::MatrixXd MlpDenoiser::forward(const Eigen::MatrixXd& z, const Eigen::VectorXd& t,
                                     const Eigen::MatrixXd* skip) const {
  check_skip(z, skip);
  Eigen::MatrixXd a = inputs(z, t);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerView& layer = layers_[l];
    ConstMatMap w(params_.data() + layer.offset, layer.out, layer.in);
    ConstVecMap b(params_.data() + layer.offset + layer.out * layer.in, layer.out);
    Eigen::MatrixXd h = w * a;
    h.colwise() += b;
    a = (l + 1 < layers_.size()) ? activate(h, arch_.activation) : std::move(h);
  }
  if (skip != nullptr) a += gate() * *skip;
  return a;
}

Image MlpDenoiser::forward(const Image& z, double t, const Image* skip) const {
  if (z.size() != arch_.size || z.channels() != arch_.channels) {
    throw DimensionError("network expects " + std::to_string(arch_.channels) + "x" + std::to_string(arch_.size) +
                         "x" + std::to_string(arch_.size) + " input");
  }
  Eigen::MatrixXd skip_col;
  if (skip != nullptr) {
    if (!skip->same_shape(z)) throw DimensionError("skip term shape differs from the input");
    skip_col = skip->flatten();
  }
  const Eigen::MatrixXd out = forward(Eigen::MatrixXd(z.flatten()), Eigen::VectorXd::Constant(1, t),
                                      skip != nullptr ? &skip_col : nullptr);
  return Image::unflatten(out.col(0), arch_.channels, arch_.size);
}

double MlpDenoiser::loss_and_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& t,
                                      const Eigen::MatrixXd& target, Eigen::VectorXd* gradient,
                                      const Eigen::MatrixXd* skip) const {
  check_skip(z, skip);
  if (target.rows() != z.rows() || target.cols() != z.cols()) {
    throw DimensionError("loss target shape differs from input");
  }
  if (z.cols() == 0) throw ArgumentError("loss: empty batch");

  // Forward pass keeping pre-activations for the backward sweep.
  std::vector<Eigen::MatrixXd> acts;
  std::vector<Eigen::MatrixXd> pre;
  acts.push_back(inputs(z, t));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerView& layer = layers_[l];
    ConstMatMap w(params_.data() + layer.offset, layer.out, layer.in);
    ConstVecMap b(params_.data() + layer.offset + layer.out * layer.in, layer.out);
    Eigen::MatrixXd h = w * acts.back();
    h.colwise() += b;
    if (l + 1 < layers_.size()) {
      acts.push_back(activate(h, arch_.activation));
      pre.push_back(std::move(h));
    } else {
      acts.push_back(std::move(h));
    }
  }

  if (skip != nullptr) acts.back() += gate() * *skip;
  const Eigen::MatrixXd residual = acts.back() - target;
  const double scale = 1.0 / static_cast<double>(residual.size());
  const double loss = residual.squaredNorm() * scale;
  if (gradient == nullptr) return loss;

  gradient->setZero(params_.size());
  Eigen::MatrixXd delta = 2.0 * scale * residual;
  if (skip != nullptr) (*gradient)(params_.size() - 1) = kGateScale * delta.cwiseProduct(*skip).sum();
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerView& layer = layers_[l];
    MatMap gw(gradient->data() + layer.offset, layer.out, layer.in);
    VecMap gb(gradient->data() + layer.offset + layer.out * layer.in, layer.out);
    gw.noalias() = delta * acts[l].transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    ConstMatMap w(params_.data() + layer.offset, layer.out, layer.in);
    Eigen::MatrixXd back = w.transpose() * delta;
    delta = back.cwiseProduct(activation_slope(pre[l - 1], arch_.activation));
  }
  return loss;
}

}  // namespace blurdiff
