// blurdiff command-line driver.

#include "blurdiff/checkpoint.hpp"
#include "blurdiff/config.hpp"
#include "blurdiff/io.hpp"
#include "blurdiff/spectrum.hpp"
#include "blurdiff/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace blurdiff;

namespace {

struct Flags {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string checkpoint;
  std::optional<std::string> last_step;
  bool clip_xhat = false;
  bool corrupt_dct = false;
  std::optional<std::string> samples;
  std::optional<std::string> reference;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
  if (f.seed) cfg.train.seed = cfg.sampler.seed = *f.seed;
  if (f.out) cfg.out_dir = *f.out;
  if (f.last_step) cfg.sampler.last_step = parse_last_step(*f.last_step);
  if (f.clip_xhat) cfg.sampler.clip_xhat = true;
  if (f.samples) cfg.psd_samples = *f.samples;
  if (f.reference) cfg.psd_reference = *f.reference;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "config.txt", serialize_config(cfg));
  return dir;
}

int cmd_inspect_schedule(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const ScheduleParams& p = cfg.schedule;
  const Index n = p.size;
  const FrequencyGrid grid(n);
  const std::vector<std::pair<Index, Index>> freqs = {
      {0, 0}, {std::min<Index>(1, n - 1), std::min<Index>(1, n - 1)}, {n / 2, n / 2}, {n - 1, n - 1}};

  std::ostringstream csv;
  csv << "t,a_t,sigma_t,sigma_b_t";
  for (auto [i, j] : freqs) csv << ",d_" << i << "_" << j;
  for (auto [i, j] : freqs) csv << ",logsnr_" << i << "_" << j;
  csv << "\n";
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    const NoiseLevels lv = noise_scaling_cosine(t, p);
    const Eigen::ArrayXXd d = frequency_scaling(t, grid, p);
    const Eigen::ArrayXXd logsnr = alpha_sigma(t, grid, p).logsnr();
    csv << fmt(t) << "," << fmt(lv.a) << "," << fmt(lv.sigma) << "," << fmt(blur_sigma(t, p));
    for (auto [i, j] : freqs) csv << "," << fmt(d(i, j));
    for (auto [i, j] : freqs) csv << "," << fmt(logsnr(i, j));
    csv << "\n";
  }
  write_file(dir / "schedule.csv", csv.str());
  std::cout << "wrote " << (dir / "schedule.csv").string() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, const Flags& f) {
  prepare_out(cfg);
  VerifyOptions opt;
  opt.corrupt_dct = f.corrupt_dct;
  const VerifyReport report = run_verification(opt);
  const std::string text = format_report(report);
  std::cout << text;
  write_file(fs::path(cfg.out_dir) / "verify.txt", text);
  return report.all_passed() ? 0 : 1;
}

Dataset load_dataset(const RunConfig& cfg) {
  Dataset data = generate_toy_dataset(cfg.dataset, cfg.dataset_seed);
  if (data.size != cfg.schedule.size || data.channels != cfg.dataset.channels) {
    throw ConfigError("dataset images are " + std::to_string(data.size) + "x" + std::to_string(data.size) + "x" +
                      std::to_string(data.channels) + ", config expects N=" + std::to_string(cfg.schedule.size) +
                      " channels=" + std::to_string(cfg.dataset.channels));
  }
  return data;
}

int cmd_gen_data(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const Dataset data = load_dataset(cfg);
  write_raw_tensor(dir / "dataset.bdt", data.images);
  std::cout << "wrote " << data.count() << " images to " << (dir / "dataset.bdt").string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const Dataset data = load_dataset(cfg);
  const FrequencyGrid grid(cfg.schedule.size);
  const Architecture arch = cfg.architecture();

  Trainer trainer(MlpDenoiser::initialized(arch, cfg.train.seed), data, grid, cfg.schedule, cfg.train);
  std::ostringstream csv;
  csv << "step,loss,ema_loss\n";
  const Index report_every = std::max<Index>(1, cfg.train.steps / 10);
  for (Index s = 0; s < cfg.train.steps; ++s) {
    const LossRecord r = trainer.step();
    csv << r.step << "," << fmt(r.loss) << "," << fmt(r.ema_loss) << "\n";
    if ((s + 1) % report_every == 0 || s + 1 == cfg.train.steps) {
      std::cout << "step " << r.step << " loss " << r.loss << " ema_loss " << r.ema_loss << "\n";
    }
  }
  write_file(dir / "loss.csv", csv.str());
  save_checkpoint(dir / "checkpoint.bdfm", Checkpoint{arch, trainer.model().parameters(), trainer.optimizer(), trainer.ema()});
  save_checkpoint(dir / "checkpoint_ema.bdfm", Checkpoint{arch, trainer.ema(), {}, trainer.ema()});
  std::cout << "wrote " << (dir / "checkpoint.bdfm").string() << " and " << (dir / "checkpoint_ema.bdfm").string()
            << "\n";
  return 0;
}

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& cfg, const Flags& f, const FrequencyGrid& grid) {
  if (cfg.denoiser == DenoiserKind::oracle) {
    GaussianDataPrior prior{Eigen::ArrayXXd::Zero(grid.size(), grid.size()),
                            gaussian_spectrum_std(grid, cfg.dataset.spectrum_exponent)};
    return std::make_unique<GaussianOracleDenoiser>(std::move(prior), cfg.dataset.channels);
  }
  if (f.checkpoint.empty()) throw ConfigError("sample with denoiser=network needs --checkpoint");
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const Architecture want = cfg.architecture();
  if (ck.architecture.size != want.size || ck.architecture.channels != want.channels) {
    throw ConfigError("checkpoint '" + f.checkpoint + "' is for N=" + std::to_string(ck.architecture.size) +
                      " channels=" + std::to_string(ck.architecture.channels) + ", config has N=" +
                      std::to_string(want.size) + " channels=" + std::to_string(want.channels));
  }
  if (!(ck.architecture == want)) {
    throw ConfigError("checkpoint '" + f.checkpoint + "' network layout differs from the config (hidden, "
                      "time_frequencies, activation, prediction or gaussian_skip)");
  }
  MlpDenoiser net(ck.architecture);
  net.set_parameters(ck.parameters);
  return std::make_unique<NetworkDenoiser>(std::move(net));
}

int cmd_sample(const RunConfig& cfg, const Flags& f) {
  const fs::path dir = prepare_out(cfg);
  const FrequencyGrid grid(cfg.schedule.size);
  const auto denoiser = make_denoiser(cfg, f, grid);

  std::vector<Image> images;
  if (cfg.sampler.record_trajectory) {
    const auto traj = sample_trajectory(*denoiser, cfg.sampler, grid, cfg.schedule);
    std::vector<Image> flat;
    for (const auto& snap : traj) flat.insert(flat.end(), snap.batch.begin(), snap.batch.end());
    write_raw_tensor(dir / "trajectory.bdt", flat);
    images = traj.back().batch;
  } else {
    images = sample(*denoiser, cfg.sampler, grid, cfg.schedule);
  }

  const char* ext = images.front().channels() == 1 ? ".pgm" : ".ppm";
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu", i);
    write_file(dir / (std::string(name) + ext), encode_pnm(images[i]));
  }
  const auto columns = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(images.size()))));
  write_file(dir / (std::string("grid") + ext), encode_pnm(tile_grid(images, columns)));
  write_raw_tensor(dir / "samples.bdt", images);
  std::cout << "wrote " << images.size() << " samples to " << dir.string() << "\n";
  return 0;
}

int cmd_psd(const RunConfig& cfg) {
  if (cfg.psd_samples.empty() || cfg.psd_reference.empty()) {
    throw ConfigError("psd needs --samples and --reference (or psd_samples / psd_reference in the config)");
  }
  const fs::path dir = prepare_out(cfg);
  const auto samples = read_raw_tensor(cfg.psd_samples);
  const auto reference = read_raw_tensor(cfg.psd_reference);
  const SpectralReport r = compare_spectra(samples, reference, cfg.psd_low_frequencies);

  std::ostringstream rep;
  rep << "samples " << r.samples << "\n"
      << "references " << r.references << "\n"
      << "low_frequencies " << r.low_frequencies << "\n"
      << "max_low_relative_deviation " << fmt(r.max_low_relative_deviation) << "\n"
      << "log_spectral_distance " << fmt(r.log_spectral_distance) << "\n";
  std::ostringstream csv;
  csv << "i,j,lambda,sample_power,reference_power\n";
  const FrequencyGrid grid(r.sample_power.rows());
  for (auto [i, j] : grid.ordered_by_frequency()) {
    csv << i << "," << j << "," << fmt(grid(i, j)) << "," << fmt(r.sample_power(i, j)) << ","
        << fmt(r.reference_power(i, j)) << "\n";
  }
  write_file(dir / "psd_report.txt", rep.str());
  write_file(dir / "psd.csv", csv.str());
  std::cout << rep.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blurring diffusion models on toy data"};
  app.require_subcommand(1, 1);
  Flags f;

  const auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "key=value config file");
    sub->add_option("--seed", f.seed, "overrides the training and sampling seed");
    sub->add_option("--out", f.out, "output directory");
  };

  auto* inspect = app.add_subcommand("inspect-schedule", "write the schedule CSV");
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  auto* train = app.add_subcommand("train", "train a denoiser");
  auto* sample = app.add_subcommand("sample", "draw samples");
  auto* psd = app.add_subcommand("psd", "compare sample and reference spectra");
  auto* gen = app.add_subcommand("gen-data", "write the configured dataset");
  for (auto* sub : {inspect, verify, train, sample, psd, gen}) common(sub);

  verify->add_flag("--corrupt-dct", f.corrupt_dct, "test only: perturb the DCT basis");
  sample->add_option("--checkpoint", f.checkpoint, "checkpoint file");
  sample->add_option("--last-step", f.last_step, "literal or mean")->check(CLI::IsMember({"literal", "mean"}));
  sample->add_flag("--clip-xhat", f.clip_xhat, "clamp predicted images to [-1, 1]");
  psd->add_option("--samples", f.samples, "raw tensor of samples");
  psd->add_option("--reference", f.reference, "raw tensor of reference images");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve(f);
    if (*inspect) return cmd_inspect_schedule(cfg);
    if (*verify) return cmd_verify(cfg, f);
    if (*train) return cmd_train(cfg);
    if (*sample) return cmd_sample(cfg, f);
    if (*psd) return cmd_psd(cfg);
    if (*gen) return cmd_gen_data(cfg);
  } catch (const TrainingDiverged& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
