#include "blurdiff/checkpoint.hpp"
#include "blurdiff/config.hpp"
#include "blurdiff/dataset.hpp"
#include "blurdiff/io.hpp"
#include "blurdiff/spectrum.hpp"
#include "blurdiff/stats.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace blurdiff;
using testutil::max_abs_diff;

TEST_CASE("pixel byte mapping") {
  CHECK(pixel_byte(-1.0) == 0);
  CHECK(pixel_byte(1.0) == 255);
  CHECK(pixel_byte(0.0) == 128);
  CHECK(pixel_byte(-5.0) == 0);
  CHECK(pixel_byte(3.0) == 255);
  CHECK(pixel_byte(2.0 * 100.0 / 255.0 - 1.0) == 100);
}

TEST_CASE("tile grid layout") {
  std::vector<Image> imgs;
  for (int i = 0; i < 16; ++i) imgs.push_back(Image::constant(1, 2, i / 16.0));
  const Image grid = tile_grid(imgs, 4);
  REQUIRE(grid.size() == 8);
  for (Index r = 0; r < 8; ++r)
    for (Index c = 0; c < 8; ++c) CHECK(grid(0, r, c) == ((r / 2) * 4 + c / 2) / 16.0);

  imgs.resize(5);
  const Image padded = tile_grid(imgs, 3);
  REQUIRE(padded.size() == 6);
  CHECK(padded(0, 2, 2) == 4.0 / 16.0);  // image 4 at row 1, column 1
  CHECK(padded(0, 2, 4) == -1.0);
  CHECK(padded(0, 5, 5) == -1.0);
  CHECK_THROWS_AS(tile_grid({}, 3), ArgumentError);
}

TEST_CASE("PNM encoding") {
  Image g = Image::constant(1, 2, -1.0);
  g(0, 0, 1) = 1.0;
  CHECK(encode_pnm(g) == std::string("P5\n2 2\n255\n\x00\xff\x00\x00", 15));
  Image rgb = Image::constant(3, 1, 0.0);
  rgb(0, 0, 0) = 1.0;
  CHECK(encode_pnm(rgb) == std::string("P6\n1 1\n255\n\xff\x80\x80", 14));
  CHECK_THROWS_AS(encode_pnm(Image::zeros(2, 2)), DimensionError);
}

TEST_CASE("raw tensor roundtrip") {
  std::vector<Image> imgs = {testutil::random_image(1, 3, 4), testutil::random_image(2, 3, 4)};
  const std::string bytes = encode_raw_tensor(imgs);
  CHECK(bytes.substr(0, 4) == "BDT0");
  CHECK(bytes.size() == 4 + 16 + 2 * 3 * 16 * 4);
  const auto back = decode_raw_tensor(bytes);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    // float32 storage
    CHECK(max_abs_diff(back[i], imgs[i]) < 1e-6);
    CHECK(encode_raw_tensor(back) == bytes);
  }
  CHECK_THROWS_AS(decode_raw_tensor(bytes.substr(0, bytes.size() - 1)), IoError);
  CHECK_THROWS_AS(decode_raw_tensor("XXXX" + bytes.substr(4)), IoError);
  CHECK(decode_raw_tensor(encode_raw_tensor(std::vector<Image>{})).empty());
}

TEST_CASE("checkpoint roundtrip") {
  Architecture arch;
  arch.size = 4;
  arch.hidden = {5, 3};
  arch.time_frequencies = 2;
  arch.activation = Activation::tanh;
  arch.prediction = Prediction::x;
  Checkpoint ck;
  ck.architecture = arch;
  const Index p = arch.parameter_count();
  ck.parameters = Eigen::VectorXd::LinSpaced(p, -1.0, 1.0);
  ck.ema = Eigen::VectorXd::LinSpaced(p, 0.0, 0.5);
  ck.optimizer = {Eigen::VectorXd::Constant(p, 0.25), Eigen::VectorXd::Constant(p, 0.125), 17};
  const std::string bytes = encode_checkpoint(ck);
  CHECK(bytes.substr(0, 4) == "BDFM");
  const Checkpoint back = decode_checkpoint(bytes);
  CHECK(back.architecture == arch);
  CHECK((back.parameters - ck.parameters).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((back.ema - ck.ema).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(back.optimizer.step == 17);
  CHECK(back.optimizer.m == ck.optimizer.m);
  CHECK(encode_checkpoint(back) == bytes);

  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 4)), IoError);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), IoError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(bad_version), IoError);
  ck.ema.resize(3);
  CHECK_THROWS_AS(encode_checkpoint(ck), DimensionError);
}

TEST_CASE("config parsing") {
  RunConfig c = parse_config("N = 16\n# comment\n\nsigma_b_max = 2.5  # trailing\nprediction = x\nhidden = 64,32\n");
  CHECK(c.schedule.size == 16);
  CHECK(c.schedule.sigma_b_max == 2.5);
  CHECK(c.prediction == Prediction::x);
  CHECK(c.hidden == std::vector<Index>{64, 32});
  CHECK(parse_config(serialize_config(c)) == c);
  CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));

  RunConfig d;
  d.schedule.d_min = 0.1 + 0.2;  // not exactly representable in short form
  CHECK(parse_config(serialize_config(d)).schedule.d_min == d.schedule.d_min);

  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N = 8\nN = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N = eight\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("gaussian_skip = maybe\n"), ConfigError);
}

TEST_CASE("toy datasets") {
  ToyDatasetSpec spec;
  spec.count = 50;
  const Dataset a = generate_toy_dataset(spec, 3), b = generate_toy_dataset(spec, 3);
  const Dataset c = generate_toy_dataset(spec, 4);
  REQUIRE(a.count() == 50);
  bool differs = false;
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(max_abs_diff(a.images[i], b.images[i]) == 0.0);
    differs = differs || max_abs_diff(a.images[i], c.images[i]) > 0.0;
    for (const auto& p : a.images[i].planes()) CHECK(((p.array() == 1.0) || (p.array() == -1.0)).all());
  }
  CHECK(differs);
  spec.bar_width = 9;
  CHECK_THROWS_AS(generate_toy_dataset(spec, 1), ArgumentError);
  CHECK(parse_dataset_kind("gaussian_spectrum") == DatasetKind::gaussian_spectrum);
  CHECK_THROWS_AS(parse_dataset_kind("faces"), ArgumentError);
}

TEST_CASE("gaussian spectrum dataset matches its spectrum") {
  const FrequencyGrid g(8);
  SUBCASE("flat exponent is white noise") {
    const Eigen::ArrayXXd s = gaussian_spectrum_std(g, 0.0);
    CHECK((s - 0.2).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("sampled variance") {
    ToyDatasetSpec spec;
    spec.kind = DatasetKind::gaussian_spectrum;
    spec.count = 50000;
    const Dataset d = generate_toy_dataset(spec, 5);
    const Eigen::ArrayXXd var = gaussian_spectrum_std(g, 1.0).square();
    GridMoments m(8, 8);
    for (const Image& x : d.images) m.add(dct2(x)[0].array());
    CHECK((m.mean().abs() / GridMoments::mean_se(var, spec.count)).maxCoeff() < 4.0);
    CHECK(((m.variance() - var).abs() / GridMoments::var_se(var, spec.count)).maxCoeff() < 4.0);
    // Largest per-pixel std is pinned.
    double max_var = 0.0;
    for (Index r = 0; r < 8; ++r) {
      for (Index c = 0; c < 8; ++c) {
        double s = 0.0, s2 = 0.0;
        for (const Image& x : d.images) {
          s += x(0, r, c);
          s2 += x(0, r, c) * x(0, r, c);
        }
        max_var = std::max(max_var, s2 / spec.count - std::pow(s / spec.count, 2));
      }
    }
    CHECK(std::sqrt(max_var) == doctest::Approx(0.2).epsilon(0.02));
  }
}

TEST_CASE("spectral comparison") {
  ToyDatasetSpec spec;
  spec.count = 200;
  const Dataset bars = generate_toy_dataset(spec, 1);
  const SpectralReport same = compare_spectra(bars.images, bars.images, 10);
  CHECK(same.log_spectral_distance == 0.0);
  CHECK(same.max_low_relative_deviation == 0.0);
  CHECK(same.samples == 200);

  std::vector<Image> noise;
  for (std::uint32_t i = 0; i < 200; ++i) noise.push_back(testutil::random_image(3, 1, 8, i));
  const SpectralReport white = compare_spectra(noise, bars.images, 10);
  CHECK(white.log_spectral_distance > 1.0);
  CHECK(white.max_low_relative_deviation > 0.5);
  // mean power of unit white noise is 1 everywhere
  CHECK((white.sample_power - 1.0).abs().maxCoeff() < 0.5);

  const std::vector<Image> few(bars.images.begin(), bars.images.begin() + 99);
  CHECK_THROWS_AS(compare_spectra(few, bars.images, 10), ArgumentError);
}
