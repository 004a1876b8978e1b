#pragma once

#include "blurdiff/tensor.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace blurdiff {

/// Orthonormal DCT-II matrix C with C(k, n) = w_k cos(pi (2n + 1) k / 2N),
/// w_0 = sqrt(1/N) and w_k = sqrt(2/N) otherwise. Rows index frequency, so
/// C is V^T and C^T is V.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dct_matrix(Index n) {
  if (n < 1) throw ArgumentError("dct_matrix: size must be >= 1");
  using std::cos;
  using std::sqrt;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c(n, n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar w0 = sqrt(Scalar(1) / Scalar(n));
  const Scalar wk = sqrt(Scalar(2) / Scalar(n));
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      c(k, i) = (k == 0 ? w0 : wk) * cos(pi * Scalar(2 * i + 1) * Scalar(k) / Scalar(2 * n));
    }
  }
  return c;
}

/// Per-thread cache of dct_matrix so hot loops do not recompute cosines.
template <typename Scalar = double>
const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& dct_basis(Index n) {
  thread_local std::map<Index, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, dct_matrix<Scalar>(n)).first;
  return it->second;
}

/// Orthonormal 2-D DCT-II of every channel (columns then rows, C X C^T).
template <typename Scalar>
SpectrumT<Scalar> dct2(const ImageT<Scalar>& image) {
  if (image.empty()) throw DimensionError("dct2: empty image");
  const auto& c = dct_basis<Scalar>(image.size());
  std::vector<typename SpectrumT<Scalar>::Plane> planes;
  planes.reserve(static_cast<std::size_t>(image.channels()));
  for (const auto& p : image.planes()) planes.push_back(c * p * c.transpose());
  return SpectrumT<Scalar>(std::move(planes));
}

/// Inverse of dct2 (C^T U C).
template <typename Scalar>
ImageT<Scalar> idct2(const SpectrumT<Scalar>& freq) {
  if (freq.empty()) throw DimensionError("idct2: empty coefficient grid");
  const auto& c = dct_basis<Scalar>(freq.size());
  std::vector<typename ImageT<Scalar>::Plane> planes;
  planes.reserve(static_cast<std::size_t>(freq.channels()));
  for (const auto& p : freq.planes()) planes.push_back(c.transpose() * p * c);
  return ImageT<Scalar>(std::move(planes));
}

/// Eigenvalues of the dissipation operator on the N x N DCT grid:
/// lambda(i, j) = (pi i / N)^2 + (pi j / N)^2.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(Index n);

  Index size() const { return n_; }
  const Eigen::ArrayXXd& lambda() const { return lambda_; }
  double operator()(Index i, Index j) const { return lambda_(i, j); }

  /// Frequency indices sorted by (lambda, row, col); the first entry is DC.
  std::vector<std::pair<Index, Index>> ordered_by_frequency() const;

 private:
  Index n_;
  Eigen::ArrayXXd lambda_;
};

FrequencyGrid frequency_grid(Index n);

/// Heat dissipation for time tau: V exp(-Lambda tau) V^T x.
Image dissipate(const Image& x, const FrequencyGrid& grid, double tau);

}  // namespace blurdiff
