#pragma once

#include "blurdiff/transform.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blurdiff {

struct Dataset {
  Index size = 0;
  Index channels = 0;
  std::vector<Image> images;

  Index count() const { return static_cast<Index>(images.size()); }
  void validate() const;
};

enum class DatasetKind { gaussian_spectrum, bars, external_raw };

std::string to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);

struct ToyDatasetSpec {
  DatasetKind kind = DatasetKind::bars;
  Index size = 8;
  Index channels = 1;
  Index count = 2000;
  double spectrum_exponent = 1.0;  // p in std_k ~ (1 + lambda_k)^(-p)
  Index bar_width = 1;
  std::string path;  // external_raw only
};

/// Per-frequency std used by the gaussian_spectrum generator:
/// c (1 + lambda_k)^(-p), with c chosen so the largest per-pixel std is 0.2.
/// Pixels are then clamped to [-1, 1], which touches well under one value in
/// a million.
Eigen::ArrayXXd gaussian_spectrum_std(const FrequencyGrid& grid, double exponent);

Dataset generate_toy_dataset(const ToyDatasetSpec& spec, std::uint64_t seed);

}  // namespace blurdiff
