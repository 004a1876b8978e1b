#include "blurdiff/transform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace blurdiff;
using testutil::max_abs_diff;

namespace {

// Textbook O(N^4) double sum of the orthonormal DCT-II.
Eigen::MatrixXd naive_dct2(const Eigen::MatrixXd& x) {
  const Index n = x.rows();
  const double pi = std::numbers::pi;
  auto w = [n](Index k) { return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n); };
  Eigen::MatrixXd u(n, n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          acc += x(i, j) * std::cos(pi * (2 * i + 1) * k / (2.0 * n)) * std::cos(pi * (2 * j + 1) * l / (2.0 * n));
        }
      }
      u(k, l) = w(k) * w(l) * acc;
    }
  }
  return u;
}

}  // namespace

TEST_CASE("dct matrix is orthonormal") {
  for (Index n = 1; n <= 16; ++n) {
    const Eigen::MatrixXd c = dct_matrix(n);
    CHECK((c.transpose() * c - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(dct_matrix(0), ArgumentError);
}

TEST_CASE("dct2 agrees with the double-sum definition") {
  for (Index n : {1, 2, 3, 4, 7, 8}) {
    const Image x = testutil::random_image(1, 1, n, static_cast<std::uint32_t>(n));
    CHECK((dct2(x)[0] - naive_dct2(x[0])).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("constant image puts everything in DC") {
  const Image x = Image::constant(1, 8, 0.75);
  const Spectrum u = dct2(x);
  CHECK(u(0, 0, 0) == doctest::Approx(8 * 0.75).epsilon(1e-14));
  Eigen::MatrixXd rest = u[0];
  rest(0, 0) = 0.0;
  CHECK(rest.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("basis function maps to a single coefficient") {
  // Pixel image of the (1,0) basis function, built from the definition.
  const Index n = 4;
  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(n, n);
  unit(1, 0) = 1.0;
  Image x(1, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      x(0, i, j) = std::sqrt(2.0 / n) * std::cos(std::numbers::pi * (2 * i + 1) / (2.0 * n)) * std::sqrt(1.0 / n);
  CHECK((naive_dct2(x[0]) - unit).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((dct2(x)[0] - unit).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("idct2 examples") {
  CHECK(idct2(Spectrum::zeros(2, 8)).max_abs() == 0.0);
  Spectrum u = Spectrum::zeros(1, 8);
  u(0, 0, 0) = 8.0;
  const Image x = idct2(u);
  CHECK((x[0].array() - 1.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("roundtrip and Parseval") {
  for (Index n : {1, 2, 5, 8, 16, 33, 64}) {
    const Image x = testutil::random_image(2, 3, n, static_cast<std::uint32_t>(n));
    CHECK(max_abs_diff(idct2(dct2(x)), x) < 1e-10);
    const Spectrum u = testutil::random_spectrum(3, 3, n, static_cast<std::uint32_t>(n));
    CHECK(max_abs_diff(dct2(idct2(u)), u) < 1e-10);
    double ex = 0.0, eu = 0.0;
    for (Index c = 0; c < 3; ++c) {
      ex += x[c].squaredNorm();
      eu += dct2(x)[c].squaredNorm();
    }
    CHECK(std::abs(ex - eu) / ex < 1e-10);
  }
}

TEST_CASE("single precision transform") {
  const ImageT<float> x = ImageT<float>::constant(1, 8, 0.5f);
  const SpectrumT<float> u = dct2(x);
  CHECK(u(0, 0, 0) == doctest::Approx(4.0f).epsilon(1e-6));
  CHECK(max_abs_diff(idct2(u), x) < 1e-6);
}

TEST_CASE("frequency grid values") {
  const FrequencyGrid g = frequency_grid(8);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(1, 0) == doctest::Approx(0.15421256876702122).epsilon(1e-14));
  CHECK(g(7, 7) == doctest::Approx(15.11283173916808).epsilon(1e-14));
  CHECK((g.lambda() == g.lambda().transpose()).all());
  CHECK_THROWS_AS(frequency_grid(0), ArgumentError);

  const auto order = g.ordered_by_frequency();
  REQUIRE(order.size() == 64);
  CHECK(order.front() == std::pair<Index, Index>{0, 0});
  for (std::size_t k = 1; k < order.size(); ++k) {
    CHECK(g(order[k].first, order[k].second) >= g(order[k - 1].first, order[k - 1].second));
  }
}

TEST_CASE("dissipation is a semigroup and keeps the mean") {
  const FrequencyGrid g(16);
  const Image x = testutil::random_image(4, 1, 16);
  CHECK(max_abs_diff(dissipate(dissipate(x, g, 0.3), g, 1.1), dissipate(x, g, 1.4)) < 1e-10);
  CHECK(max_abs_diff(dissipate(x, g, 0.0), x) < 1e-12);
  CHECK(dissipate(x, g, 2.0)[0].mean() == doctest::Approx(x[0].mean()).epsilon(1e-12));
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(dct2(Image()), DimensionError);
  CHECK_THROWS_AS(dissipate(Image::zeros(1, 4), FrequencyGrid(8), 1.0), DimensionError);
}
