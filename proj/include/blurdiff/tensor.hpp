#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace blurdiff {

using Eigen::Index;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PixelDomain {};
struct FrequencyDomain {};

// Square multi-channel grid. The domain tag keeps pixel-space images and
// DCT coefficients from being mixed up at compile time.
template <typename Scalar_, typename Domain_>
class Tensor {
 public:
  using Scalar = Scalar_;
  using Domain = Domain_;
  using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Coeffs = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tensor() = default;

  Tensor(Index channels, Index size) {
    if (channels < 1 || size < 1) {
      throw DimensionError("tensor needs at least one channel and size >= 1");
    }
    planes_.assign(static_cast<std::size_t>(channels), Plane::Zero(size, size));
  }

  explicit Tensor(std::vector<Plane> planes) : planes_(std::move(planes)) {
    if (planes_.empty()) throw DimensionError("tensor needs at least one channel");
    const Index n = planes_.front().rows();
    for (const auto& p : planes_) {
      if (p.rows() != p.cols()) throw DimensionError("tensor planes must be square");
      if (p.rows() != n) throw DimensionError("tensor planes must share one size");
    }
    if (n < 1) throw DimensionError("tensor size must be >= 1");
  }

  static Tensor zeros(Index channels, Index size) { return Tensor(channels, size); }

  static Tensor constant(Index channels, Index size, Scalar value) {
    Tensor out(channels, size);
    for (auto& p : out.planes_) p.setConstant(value);
    return out;
  }

  Index channels() const { return static_cast<Index>(planes_.size()); }
  Index size() const { return planes_.empty() ? 0 : planes_.front().rows(); }
  Index numel() const { return channels() * size() * size(); }
  bool empty() const { return planes_.empty(); }

  Plane& operator[](Index c) { return planes_[static_cast<std::size_t>(c)]; }
  const Plane& operator[](Index c) const { return planes_[static_cast<std::size_t>(c)]; }

  Scalar& operator()(Index c, Index row, Index col) { return (*this)[c](row, col); }
  Scalar operator()(Index c, Index row, Index col) const { return (*this)[c](row, col); }

  std::vector<Plane>& planes() { return planes_; }
  const std::vector<Plane>& planes() const { return planes_; }

  bool same_shape(const Tensor& other) const {
    return channels() == other.channels() && size() == other.size();
  }

  Scalar max_abs() const {
    Scalar m(0);
    for (const auto& p : planes_) m = std::max(m, p.cwiseAbs().maxCoeff());
    return m;
  }

  bool all_finite() const {
    for (const auto& p : planes_) {
      if (!p.allFinite()) return false;
    }
    return true;
  }

  // Elementwise product with a per-frequency (or per-pixel) grid shared by
  // every channel.
  Tensor scaled(const Coeffs& grid) const {
    check_grid(grid);
    Tensor out = *this;
    for (auto& p : out.planes_) p.array() *= grid;
    return out;
  }

  Tensor& operator+=(const Tensor& other) {
    check_shape(other);
    for (std::size_t c = 0; c < planes_.size(); ++c) planes_[c] += other.planes_[c];
    return *this;
  }
  Tensor& operator-=(const Tensor& other) {
    check_shape(other);
    for (std::size_t c = 0; c < planes_.size(); ++c) planes_[c] -= other.planes_[c];
    return *this;
  }
  Tensor& operator*=(Scalar s) {
    for (auto& p : planes_) p *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, Scalar s) { return a *= s; }
  friend Tensor operator*(Scalar s, Tensor a) { return a *= s; }

  // Row-major flattening in (channel, row, col) order; the layout used by
  // the network input and the raw tensor file format.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flatten() const {
    const Index n = size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(numel());
    Index k = 0;
    for (const auto& p : planes_) {
      for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) v(k++) = p(r, c);
      }
    }
    return v;
  }

  template <typename Derived>
  static Tensor unflatten(const Eigen::MatrixBase<Derived>& v, Index channels, Index size) {
    if (v.size() != channels * size * size) {
      throw DimensionError("flat vector length does not match tensor shape");
    }
    Tensor out(channels, size);
    Index k = 0;
    for (auto& p : out.planes_) {
      for (Index r = 0; r < size; ++r) {
        for (Index c = 0; c < size; ++c) p(r, c) = v(k++);
      }
    }
    return out;
  }

 private:
  void check_shape(const Tensor& other) const {
    if (!same_shape(other)) throw DimensionError("tensor shapes differ");
  }
  void check_grid(const Coeffs& grid) const {
    if (grid.rows() != size() || grid.cols() != size()) {
      throw DimensionError("coefficient grid does not match tensor size");
    }
  }

  std::vector<Plane> planes_;
};

template <typename Scalar>
using ImageT = Tensor<Scalar, PixelDomain>;
template <typename Scalar>
using SpectrumT = Tensor<Scalar, FrequencyDomain>;

using Image = ImageT<double>;
using Spectrum = SpectrumT<double>;

}  // namespace blurdiff
