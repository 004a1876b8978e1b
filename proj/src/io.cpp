#include "blurdiff/io.hpp"

#include "blurdiff/bytes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace blurdiff {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string encode_raw_tensor(std::span<const Image> images) {
  ByteWriter w;
  w.magic("BDT0");
  const Index channels = images.empty() ? 0 : images.front().channels();
  const Index size = images.empty() ? 0 : images.front().size();
  w.u32(static_cast<std::uint32_t>(images.size()));
  w.u32(static_cast<std::uint32_t>(channels));
  w.u32(static_cast<std::uint32_t>(size));
  w.u32(static_cast<std::uint32_t>(size));
  for (const auto& img : images) {
    if (img.channels() != channels || img.size() != size) throw DimensionError("raw tensor images differ in shape");
    const Eigen::VectorXd flat = img.flatten();
    for (Index k = 0; k < flat.size(); ++k) w.f32(static_cast<float>(flat(k)));
  }
  return w.take();
}

std::vector<Image> decode_raw_tensor(const std::string& bytes) {
  ByteReader r(bytes, "raw tensor");
  r.expect_magic("BDT0");
  const std::uint32_t count = r.u32();
  const std::uint32_t channels = r.u32();
  const std::uint32_t height = r.u32();
  const std::uint32_t width = r.u32();
  if (height != width) throw IoError("raw tensor: only square images are supported");
  if (count > 0 && (channels == 0 || height == 0)) throw IoError("raw tensor: zero-sized images");
  const std::uint64_t per_image = std::uint64_t{channels} * height * width;
  if (r.remaining() != std::uint64_t{count} * per_image * 4) throw IoError("raw tensor: payload size mismatch");
  std::vector<Image> out;
  out.reserve(count);
  Eigen::VectorXd flat(static_cast<Index>(per_image));
  for (std::uint32_t i = 0; i < count; ++i) {
    for (Index k = 0; k < flat.size(); ++k) flat(k) = r.f32();
    out.push_back(Image::unflatten(flat, channels, height));
  }
  return out;
}

void write_raw_tensor(const std::filesystem::path& path, std::span<const Image> images) {
  write_file(path, encode_raw_tensor(images));
}

std::vector<Image> read_raw_tensor(const std::filesystem::path& path) { return decode_raw_tensor(read_file(path)); }

std::uint8_t pixel_byte(double v) {
  const double unit = std::clamp((v + 1.0) / 2.0, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(unit * 255.0 + 0.5));
}

std::string encode_pnm(const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError("PNM output needs 1 or 3 channels, got " + std::to_string(image.channels()));
  }
  const Index n = image.size();
  std::string out = (image.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.numel()));
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      for (Index ch = 0; ch < image.channels(); ++ch) out.push_back(static_cast<char>(pixel_byte(image(ch, r, c))));
    }
  }
  return out;
}

Image tile_grid(std::span<const Image> images, Index columns) {
  if (images.empty()) throw ArgumentError("tile_grid: no images");
  if (columns < 1) throw ArgumentError("tile_grid: columns must be >= 1");
  const Index n = images.front().size();
  const Index ch = images.front().channels();
  const auto count = static_cast<Index>(images.size());
  const Index rows = (count + columns - 1) / columns;
  // Grids stay square so they fit the square tensor type.
  const Index side = std::max(rows, columns) * n;
  Image out = Image::constant(ch, side, -1.0);
  for (Index i = 0; i < count; ++i) {
    const Image& img = images[static_cast<std::size_t>(i)];
    if (img.size() != n || img.channels() != ch) throw DimensionError("tile_grid: images differ in shape");
    for (Index c = 0; c < ch; ++c) out[c].block((i / columns) * n, (i % columns) * n, n, n) = img[c];
  }
  return out;
}

}  // namespace blurdiff
