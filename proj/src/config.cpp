#include "blurdiff/config.hpp"

#include "blurdiff/io.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace blurdiff {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': not a non-negative integer: '" + v + "'");
  }
  return out;
}

Index to_index(const std::string& key, const std::string& v) { return static_cast<Index>(to_u64(key, v)); }

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<Index> to_widths(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  if (v.empty() || v == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_index(key, trim(item)));
  return out;
}

std::string widths_string(const std::vector<Index>& w) {
  if (w.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

std::string denoiser_string(DenoiserKind k) { return k == DenoiserKind::oracle ? "oracle" : "network"; }

DenoiserKind parse_denoiser(const std::string& v) {
  if (v == "network") return DenoiserKind::network;
  if (v == "oracle") return DenoiserKind::oracle;
  throw ConfigError("key 'denoiser': expected network or oracle, got '" + v + "'");
}

struct Key {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

// Serialization order is the order of this table.
const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"N", [](const RunConfig& c) { return std::to_string(c.schedule.size); },
       [](RunConfig& c, const std::string& v) { c.schedule.size = c.dataset.size = to_index("N", v); }},
      {"channels", [](const RunConfig& c) { return std::to_string(c.dataset.channels); },
       [](RunConfig& c, const std::string& v) { c.dataset.channels = to_index("channels", v); }},
      {"T", [](const RunConfig& c) { return std::to_string(c.schedule.steps); },
       [](RunConfig& c, const std::string& v) { c.schedule.steps = c.sampler.steps = to_index("T", v); }},
      {"sigma_b_max", [](const RunConfig& c) { return fmt_double(c.schedule.sigma_b_max); },
       [](RunConfig& c, const std::string& v) { c.schedule.sigma_b_max = to_double("sigma_b_max", v); }},
      {"blur_shape", [](const RunConfig& c) { return to_string(c.schedule.blur_shape); },
       [](RunConfig& c, const std::string& v) { c.schedule.blur_shape = parse_blur_shape(v); }},
      {"d_min", [](const RunConfig& c) { return fmt_double(c.schedule.d_min); },
       [](RunConfig& c, const std::string& v) { c.schedule.d_min = to_double("d_min", v); }},
      {"logsnr_min", [](const RunConfig& c) { return fmt_double(c.schedule.logsnr_min); },
       [](RunConfig& c, const std::string& v) { c.schedule.logsnr_min = to_double("logsnr_min", v); }},
      {"logsnr_max", [](const RunConfig& c) { return fmt_double(c.schedule.logsnr_max); },
       [](RunConfig& c, const std::string& v) { c.schedule.logsnr_max = to_double("logsnr_max", v); }},
      {"seed", [](const RunConfig& c) { return std::to_string(c.train.seed); },
       [](RunConfig& c, const std::string& v) { c.train.seed = c.sampler.seed = to_u64("seed", v); }},
      {"dataset_kind", [](const RunConfig& c) { return to_string(c.dataset.kind); },
       [](RunConfig& c, const std::string& v) { c.dataset.kind = parse_dataset_kind(v); }},
      {"dataset_count", [](const RunConfig& c) { return std::to_string(c.dataset.count); },
       [](RunConfig& c, const std::string& v) { c.dataset.count = to_index("dataset_count", v); }},
      {"dataset_seed", [](const RunConfig& c) { return std::to_string(c.dataset_seed); },
       [](RunConfig& c, const std::string& v) { c.dataset_seed = to_u64("dataset_seed", v); }},
      {"spectrum_exponent", [](const RunConfig& c) { return fmt_double(c.dataset.spectrum_exponent); },
       [](RunConfig& c, const std::string& v) { c.dataset.spectrum_exponent = to_double("spectrum_exponent", v); }},
      {"bar_width", [](const RunConfig& c) { return std::to_string(c.dataset.bar_width); },
       [](RunConfig& c, const std::string& v) { c.dataset.bar_width = to_index("bar_width", v); }},
      {"dataset_path", [](const RunConfig& c) { return c.dataset.path; },
       [](RunConfig& c, const std::string& v) { c.dataset.path = v; }},
      {"denoiser", [](const RunConfig& c) { return denoiser_string(c.denoiser); },
       [](RunConfig& c, const std::string& v) { c.denoiser = parse_denoiser(v); }},
      {"hidden", [](const RunConfig& c) { return widths_string(c.hidden); },
       [](RunConfig& c, const std::string& v) { c.hidden = to_widths("hidden", v); }},
      {"time_frequencies", [](const RunConfig& c) { return std::to_string(c.time_frequencies); },
       [](RunConfig& c, const std::string& v) { c.time_frequencies = to_index("time_frequencies", v); }},
      {"activation", [](const RunConfig& c) { return to_string(c.activation); },
       [](RunConfig& c, const std::string& v) { c.activation = parse_activation(v); }},
      {"prediction", [](const RunConfig& c) { return to_string(c.prediction); },
       [](RunConfig& c, const std::string& v) { c.prediction = parse_prediction(v); }},
      {"gaussian_skip", [](const RunConfig& c) { return std::string(c.gaussian_skip ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.gaussian_skip = to_bool("gaussian_skip", v); }},
      {"learning_rate", [](const RunConfig& c) { return fmt_double(c.train.learning_rate); },
       [](RunConfig& c, const std::string& v) { c.train.learning_rate = to_double("learning_rate", v); }},
      {"batch_size", [](const RunConfig& c) { return std::to_string(c.train.batch_size); },
       [](RunConfig& c, const std::string& v) { c.train.batch_size = to_index("batch_size", v); }},
      {"train_steps", [](const RunConfig& c) { return std::to_string(c.train.steps); },
       [](RunConfig& c, const std::string& v) { c.train.steps = to_index("train_steps", v); }},
      {"ema_decay", [](const RunConfig& c) { return fmt_double(c.train.ema_decay); },
       [](RunConfig& c, const std::string& v) { c.train.ema_decay = to_double("ema_decay", v); }},
      {"adam_beta1", [](const RunConfig& c) { return fmt_double(c.train.beta1); },
       [](RunConfig& c, const std::string& v) { c.train.beta1 = to_double("adam_beta1", v); }},
      {"adam_beta2", [](const RunConfig& c) { return fmt_double(c.train.beta2); },
       [](RunConfig& c, const std::string& v) { c.train.beta2 = to_double("adam_beta2", v); }},
      {"adam_epsilon", [](const RunConfig& c) { return fmt_double(c.train.adam_epsilon); },
       [](RunConfig& c, const std::string& v) { c.train.adam_epsilon = to_double("adam_epsilon", v); }},
      {"loss_smoothing", [](const RunConfig& c) { return fmt_double(c.train.loss_smoothing); },
       [](RunConfig& c, const std::string& v) { c.train.loss_smoothing = to_double("loss_smoothing", v); }},
      {"sample_batch", [](const RunConfig& c) { return std::to_string(c.sampler.batch); },
       [](RunConfig& c, const std::string& v) { c.sampler.batch = to_index("sample_batch", v); }},
      {"last_step", [](const RunConfig& c) { return to_string(c.sampler.last_step); },
       [](RunConfig& c, const std::string& v) { c.sampler.last_step = parse_last_step(v); }},
      {"clip_xhat", [](const RunConfig& c) { return std::string(c.sampler.clip_xhat ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.sampler.clip_xhat = to_bool("clip_xhat", v); }},
      {"record_trajectory",
       [](const RunConfig& c) { return std::string(c.sampler.record_trajectory ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.sampler.record_trajectory = to_bool("record_trajectory", v); }},
      {"trajectory_stride", [](const RunConfig& c) { return std::to_string(c.sampler.trajectory_stride); },
       [](RunConfig& c, const std::string& v) { c.sampler.trajectory_stride = to_index("trajectory_stride", v); }},
      {"out_dir", [](const RunConfig& c) { return c.out_dir; },
       [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"psd_samples", [](const RunConfig& c) { return c.psd_samples; },
       [](RunConfig& c, const std::string& v) { c.psd_samples = v; }},
      {"psd_reference", [](const RunConfig& c) { return c.psd_reference; },
       [](RunConfig& c, const std::string& v) { c.psd_reference = v; }},
      {"psd_low_frequencies", [](const RunConfig& c) { return std::to_string(c.psd_low_frequencies); },
       [](RunConfig& c, const std::string& v) { c.psd_low_frequencies = to_index("psd_low_frequencies", v); }},
  };
  return table;
}

}  // namespace

Architecture RunConfig::architecture() const {
  Architecture a;
  a.size = schedule.size;
  a.channels = dataset.channels;
  a.time_frequencies = time_frequencies;
  a.hidden = hidden;
  a.activation = activation;
  a.prediction = prediction;
  a.gaussian_skip = gaussian_skip;
  return a;
}

void RunConfig::validate() const {
  try {
    schedule.validate();
    train.validate();
    sampler.validate();
    architecture().validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (dataset.size != schedule.size) throw ConfigError("dataset size must equal N");
  if (psd_low_frequencies < 1) throw ConfigError("psd_low_frequencies must be >= 1");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return key == k.name; });
    if (it == table.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      it->set(cfg, value);
    } catch (const ArgumentError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::string serialize_config(const RunConfig& config) {
  std::string out = "# blurdiff resolved configuration\n";
  for (const Key& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

}  // namespace blurdiff
