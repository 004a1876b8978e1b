#pragma once

#include "blurdiff/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace blurdiff {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

// Raw tensor ("BDT0"): magic, then u32 count, channels, height, width, then
// count*channels*height*width float32 values in (sample, channel, row, col)
// order. Everything little-endian.
std::string encode_raw_tensor(std::span<const Image> images);
std::vector<Image> decode_raw_tensor(const std::string& bytes);
void write_raw_tensor(const std::filesystem::path& path, std::span<const Image> images);
std::vector<Image> read_raw_tensor(const std::filesystem::path& path);

/// round(clamp((v + 1) / 2, 0, 1) * 255), halves rounded up.
std::uint8_t pixel_byte(double v);

/// Binary PGM (P5) for one channel, PPM (P6) for three.
std::string encode_pnm(const Image& image);

/// Tiles equally sized images row-major into a grid with `columns` columns;
/// unused cells are filled with -1.
Image tile_grid(std::span<const Image> images, Index columns);

}  // namespace blurdiff
