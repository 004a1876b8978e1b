#pragma once

#include "blurdiff/dataset.hpp"
#include "blurdiff/network.hpp"
#include "blurdiff/sampler.hpp"
#include "blurdiff/schedule.hpp"
#include "blurdiff/train.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace blurdiff {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DenoiserKind { network, oracle };

/// Everything a command needs, read from a flat key=value file.
struct RunConfig {
  ScheduleParams schedule;
  TrainConfig train;
  SamplerConfig sampler;
  ToyDatasetSpec dataset;
  std::uint64_t dataset_seed = 1;
  std::vector<Index> hidden = {256, 256};
  Index time_frequencies = 16;
  Activation activation = Activation::silu;
  Prediction prediction = Prediction::eps;
  bool gaussian_skip = true;
  DenoiserKind denoiser = DenoiserKind::network;
  std::string out_dir = "out";
  std::string psd_samples;
  std::string psd_reference;
  Index psd_low_frequencies = 10;

  Architecture architecture() const;
  void validate() const;
};

/// Parses `key = value` lines. Blank lines and text after '#' are ignored;
/// unknown keys, duplicate keys and malformed values raise ConfigError.
RunConfig parse_config(const std::string& text);
/// Every key in a fixed order, so parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

RunConfig load_config(const std::filesystem::path& path);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace blurdiff
