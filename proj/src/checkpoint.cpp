#include "blurdiff/checkpoint.hpp"

#include "blurdiff/bytes.hpp"
#include "blurdiff/io.hpp"

namespace blurdiff {
namespace {

void put_vector(ByteWriter& w, const Eigen::VectorXd& v, Index n) {
  for (Index k = 0; k < n; ++k) w.f32(v.size() == n ? static_cast<float>(v(k)) : 0.0f);
}

Eigen::VectorXd get_vector(ByteReader& r, Index n) {
  Eigen::VectorXd v(n);
  for (Index k = 0; k < n; ++k) v(k) = r.f32();
  return v;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const Architecture& a = ckpt.architecture;
  const Index p = a.parameter_count();
  if (ckpt.parameters.size() != p) throw DimensionError("checkpoint: parameter count does not match architecture");
  if (ckpt.ema.size() != p) throw DimensionError("checkpoint: EMA vector does not match architecture");

  ByteWriter w;
  w.magic("BDFM");
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(a.size));
  w.u32(static_cast<std::uint32_t>(a.channels));
  w.u32(static_cast<std::uint32_t>(a.time_frequencies));
  w.u32(static_cast<std::uint32_t>(a.hidden.size()));
  for (Index width : a.hidden) w.u32(static_cast<std::uint32_t>(width));
  w.u8(static_cast<std::uint8_t>(a.activation));
  w.u8(static_cast<std::uint8_t>(a.prediction));
  w.u8(a.gaussian_skip ? 1 : 0);
  w.u64(static_cast<std::uint64_t>(p));
  put_vector(w, ckpt.parameters, p);
  w.u64(ckpt.optimizer.step);
  put_vector(w, ckpt.optimizer.m, p);
  put_vector(w, ckpt.optimizer.v, p);
  put_vector(w, ckpt.ema, p);
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  ByteReader r(bytes, "checkpoint");
  r.expect_magic("BDFM");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  Architecture& a = ckpt.architecture;
  a.size = r.u32();
  a.channels = r.u32();
  a.time_frequencies = r.u32();
  const std::uint32_t layers = r.u32();
  if (layers > 64) throw IoError("checkpoint: implausible hidden layer count");
  a.hidden.clear();
  for (std::uint32_t i = 0; i < layers; ++i) a.hidden.push_back(r.u32());
  const std::uint8_t act = r.u8();
  const std::uint8_t pred = r.u8();
  const std::uint8_t skip = r.u8();
  if (act > 1 || pred > 1 || skip > 1) throw IoError("checkpoint: unknown activation, prediction or skip code");
  a.gaussian_skip = skip == 1;
  a.activation = static_cast<Activation>(act);
  a.prediction = static_cast<Prediction>(pred);
  a.validate();
  const auto p = static_cast<Index>(r.u64());
  if (p != a.parameter_count()) throw IoError("checkpoint: parameter count does not match its architecture");
  if (r.remaining() != static_cast<std::uint64_t>(p) * 16 + 8) throw IoError("checkpoint: payload size mismatch");
  ckpt.parameters = get_vector(r, p);
  ckpt.optimizer.step = r.u64();
  ckpt.optimizer.m = get_vector(r, p);
  ckpt.optimizer.v = get_vector(r, p);
  ckpt.ema = get_vector(r, p);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace blurdiff
