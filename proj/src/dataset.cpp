#include "blurdiff/dataset.hpp"

#include "blurdiff/io.hpp"
#include "blurdiff/rng.hpp"

namespace blurdiff {

void Dataset::validate() const {
  for (const auto& img : images) {
    if (img.size() != size || img.channels() != channels) {
      throw DimensionError("dataset images must all be " + std::to_string(channels) + "x" + std::to_string(size) +
                           "x" + std::to_string(size));
    }
  }
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::gaussian_spectrum: return "gaussian_spectrum";
    case DatasetKind::bars: return "bars";
    case DatasetKind::external_raw: return "external_raw";
  }
  return "bars";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  if (text == "gaussian_spectrum") return DatasetKind::gaussian_spectrum;
  if (text == "bars") return DatasetKind::bars;
  if (text == "external_raw") return DatasetKind::external_raw;
  throw ArgumentError("unknown dataset kind '" + std::string(text) + "'");
}

Eigen::ArrayXXd gaussian_spectrum_std(const FrequencyGrid& grid, double exponent) {
  const Index n = grid.size();
  const Eigen::ArrayXXd shape = (1.0 + grid.lambda()).pow(-exponent);
  // Pixel (r, c) variance is sum_k V(r,k)^2 V(c,l)^2 s_kl^2, i.e. C^T S C^T
  // elementwise with squared basis entries.
  const Eigen::MatrixXd c2 = dct_basis(n).array().square().matrix();
  const Eigen::MatrixXd pixel_var = c2.transpose() * shape.square().matrix() * c2;
  return shape * (0.2 / std::sqrt(pixel_var.maxCoeff()));
}

namespace {

Dataset gaussian_spectrum(const ToyDatasetSpec& spec, std::uint64_t seed) {
  const FrequencyGrid grid(spec.size);
  const Eigen::ArrayXXd std = gaussian_spectrum_std(grid, spec.spectrum_exponent);
  Dataset out{spec.size, spec.channels, {}};
  out.images.reserve(static_cast<std::size_t>(spec.count));
  for (Index i = 0; i < spec.count; ++i) {
    CounterRng rng(seed, StreamPurpose::dataset, static_cast<std::uint32_t>(i));
    Spectrum u = Spectrum(normal_image(rng, spec.channels, spec.size).planes()).scaled(std);
    Image x = idct2(u);
    for (auto& p : x.planes()) p = p.cwiseMax(-1.0).cwiseMin(1.0);
    out.images.push_back(std::move(x));
  }
  return out;
}

Dataset bars(const ToyDatasetSpec& spec, std::uint64_t seed) {
  if (spec.bar_width < 1 || spec.bar_width > spec.size) {
    throw ArgumentError("bar width must lie in [1, N]");
  }
  Dataset out{spec.size, spec.channels, {}};
  out.images.reserve(static_cast<std::size_t>(spec.count));
  const auto positions = static_cast<std::uint64_t>(spec.size - spec.bar_width + 1);
  for (Index i = 0; i < spec.count; ++i) {
    CounterRng rng(seed, StreamPurpose::dataset, static_cast<std::uint32_t>(i));
    Image x = Image::constant(spec.channels, spec.size, -1.0);
    const auto bar_count = 1 + rng.below(3);
    for (std::uint64_t b = 0; b < bar_count; ++b) {
      const bool horizontal = rng.below(2) == 0;
      const auto start = static_cast<Index>(rng.below(positions));
      for (auto& p : x.planes()) {
        if (horizontal) {
          p.middleRows(start, spec.bar_width).setConstant(1.0);
        } else {
          p.middleCols(start, spec.bar_width).setConstant(1.0);
        }
      }
    }
    out.images.push_back(std::move(x));
  }
  return out;
}

Dataset external(const ToyDatasetSpec& spec) {
  if (spec.path.empty()) throw ArgumentError("external_raw dataset needs a path");
  Dataset out;
  out.images = read_raw_tensor(spec.path);
  if (out.images.empty()) throw ArgumentError("raw tensor file '" + spec.path + "' holds no images");
  out.size = out.images.front().size();
  out.channels = out.images.front().channels();
  out.validate();
  for (const auto& img : out.images) {
    if (img.max_abs() > 1.0) {
      throw ArgumentError("raw tensor file '" + spec.path + "' holds values outside [-1, 1]");
    }
  }
  return out;
}

}  // namespace

Dataset generate_toy_dataset(const ToyDatasetSpec& spec, std::uint64_t seed) {
  if (spec.kind == DatasetKind::external_raw) return external(spec);
  if (spec.size < 1 || spec.channels < 1 || spec.count < 1) {
    throw ArgumentError("dataset needs N, channels and count >= 1");
  }
  return spec.kind == DatasetKind::bars ? bars(spec, seed) : gaussian_spectrum(spec, seed);
}

}  // namespace blurdiff
