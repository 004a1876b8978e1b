#pragma once

#include "blurdiff/network.hpp"
#include "blurdiff/train.hpp"

#include <filesystem>

namespace blurdiff {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Model checkpoint ("BDFM"), little-endian throughout:
///
///   "BDFM"  u16 version
///   u32 size  u32 channels  u32 time_frequencies
///   u32 hidden_count  hidden_count x u32 width
///   u8 activation (0 silu, 1 tanh)  u8 prediction (0 eps, 1 x)
///   u8 gaussian_skip (0 or 1)
///   u64 P  P x f32 parameters
///   u64 adam_step  P x f32 first moment  P x f32 second moment
///   P x f32 EMA parameters
///
/// An empty optimizer state is stored as zero moments.
struct Checkpoint {
  Architecture architecture;
  Eigen::VectorXd parameters;
  AdamState optimizer;
  Eigen::VectorXd ema;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace blurdiff
