#include "blurdiff/transform.hpp"

#include <algorithm>

namespace blurdiff {

FrequencyGrid::FrequencyGrid(Index n) : n_(n) {
  if (n < 1) throw ArgumentError("frequency_grid: N must be >= 1");
  lambda_.resize(n, n);
  const double pi = std::numbers::pi;
  for (Index i = 0; i < n; ++i) {
    const double fi = pi * static_cast<double>(i) / static_cast<double>(n);
    for (Index j = 0; j < n; ++j) {
      const double fj = pi * static_cast<double>(j) / static_cast<double>(n);
      lambda_(i, j) = fi * fi + fj * fj;
    }
  }
}

std::vector<std::pair<Index, Index>> FrequencyGrid::ordered_by_frequency() const {
  std::vector<std::pair<Index, Index>> idx;
  idx.reserve(static_cast<std::size_t>(n_ * n_));
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) idx.emplace_back(i, j);
  }
  std::stable_sort(idx.begin(), idx.end(), [this](const auto& a, const auto& b) {
    return lambda_(a.first, a.second) < lambda_(b.first, b.second);
  });
  return idx;
}

FrequencyGrid frequency_grid(Index n) { return FrequencyGrid(n); }

Image dissipate(const Image& x, const FrequencyGrid& grid, double tau) {
  if (x.size() != grid.size()) throw DimensionError("dissipate: grid size mismatch");
  const Eigen::ArrayXXd scale = (-grid.lambda() * tau).exp();
  return idct2(dct2(x).scaled(scale));
}

}  // namespace blurdiff
