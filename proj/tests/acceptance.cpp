// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance <path-to-blurdiff-cli> <scratch-dir>

#include "blurdiff/dataset.hpp"
#include "blurdiff/denoiser.hpp"
#include "blurdiff/diffusion.hpp"
#include "blurdiff/rng.hpp"
#include "blurdiff/sampler.hpp"
#include "blurdiff/spectrum.hpp"
#include "blurdiff/stats.hpp"
#include "blurdiff/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace blurdiff;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

template <typename T>
double max_abs_diff(const T& a, const T& b) {
  double m = 0.0;
  for (Index c = 0; c < a.channels(); ++c) m = std::max(m, (a[c] - b[c]).cwiseAbs().maxCoeff());
  return m;
}

ScheduleParams params_with(double sigma_b_max, Index n, BlurShape shape = BlurShape::sin_squared) {
  ScheduleParams p;
  p.sigma_b_max = sigma_b_max;
  p.size = n;
  p.blur_shape = shape;
  return p;
}

Image random_image(std::uint32_t stream, Index n, std::uint32_t sub = 0) {
  CounterRng r(20221006, StreamPurpose::test, stream, sub);
  return normal_image(r, 1, n);
}

// Independent reference formulas, written from the definitions.

double ref_lambda(Index i, Index j, Index n) {
  return std::pow(kPi * i / n, 2) + std::pow(kPi * j / n, 2);
}

double ref_logsnr(double t) {
  const double b = std::atan(std::exp(-5.0));
  const double a = std::atan(std::exp(5.0)) - b;
  return -2.0 * std::log(std::tan(a * t + b));
}

double ref_a(double t) {
  if (t == 0.0) return std::sqrt(1.0 / (1.0 + std::exp(-10.0)));
  if (t == 1.0) return std::sqrt(1.0 / (1.0 + std::exp(10.0)));
  return std::sqrt(1.0 / (1.0 + std::exp(-ref_logsnr(t))));
}

double ref_sigma(double t) {
  if (t == 0.0) return std::sqrt(1.0 / (1.0 + std::exp(10.0)));
  if (t == 1.0) return std::sqrt(1.0 / (1.0 + std::exp(-10.0)));
  return std::sqrt(1.0 / (1.0 + std::exp(ref_logsnr(t))));
}

double ref_d(double t, double lambda, double sigma_b_max) {
  const double sb = sigma_b_max * std::pow(std::sin(t * kPi / 2), 2);
  return 0.999 * std::exp(-lambda * sb * sb / 2) + 0.001;
}

// Posterior mean and variance of u_s given (u_t, u_x) by brute-force
// integration over a dense grid.
std::pair<double, double> bayes_grid(double as, double ss, double at, double st, double ux, double ut) {
  const double ats = at / as, s2ts = st * st - ats * ats * ss * ss;
  const double center = as * ux, half = 12.0 * ss;
  const int cells = 200000;
  const double h = 2 * half / cells;
  double w = 0, m1 = 0;
  std::vector<double> lp(cells + 1);
  double top = -INFINITY;
  for (int k = 0; k <= cells; ++k) {
    const double us = center - half + k * h;
    lp[k] = -0.5 * std::pow(ut - ats * us, 2) / s2ts - 0.5 * std::pow(us - center, 2) / (ss * ss);
    top = std::max(top, lp[k]);
  }
  for (int k = 0; k <= cells; ++k) {
    const double us = center - half + k * h;
    const double p = std::exp(lp[k] - top);
    w += p;
    m1 += p * us;
  }
  const double mean = m1 / w;
  double m2 = 0;
  for (int k = 0; k <= cells; ++k) {
    const double us = center - half + k * h;
    m2 += std::exp(lp[k] - top) * (us - mean) * (us - mean);
  }
  return {mean, m2 / w};
}

Outcome criterion1() {
  Outcome o;
  double ortho = 0.0, defn = 0.0;
  for (Index n = 1; n <= 16; ++n) {
    const Eigen::MatrixXd v = dct_matrix(n);
    ortho = std::max(ortho, (v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    for (Index k = 0; k < n; ++k) {
      for (Index i = 0; i < n; ++i) {
        const double w = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        defn = std::max(defn, std::abs(v(k, i) - w * std::cos(kPi * (2 * i + 1) * k / (2.0 * n))));
      }
    }
  }
  double roundtrip = 0.0;
  for (Index n = 1; n <= 64; ++n) {
    const Image x = random_image(1, n);
    roundtrip = std::max(roundtrip, max_abs_diff(idct2(dct2(x)), x));
  }
  const FrequencyGrid g(16);
  const Image x = random_image(2, 16);
  const double semigroup = max_abs_diff(dissipate(dissipate(x, g, 0.7), g, 2.3), dissipate(x, g, 3.0));
  o.require(ortho < 1e-10, "orthogonality");
  o.require(defn < 1e-12, "matrix definition");
  o.require(roundtrip < 1e-10, "roundtrip");
  o.require(semigroup < 1e-10, "semigroup");
  o.detail << " ortho=" << sci(ortho) << " roundtrip=" << sci(roundtrip) << " semigroup=" << sci(semigroup);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const ScheduleParams base;
  double vp = 0.0, ref = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    const NoiseLevels nl = noise_scaling_cosine(t, base);
    vp = std::max(vp, std::abs(nl.a * nl.a + nl.sigma * nl.sigma - 1.0));
    ref = std::max({ref, std::abs(nl.a - ref_a(t)), std::abs(nl.sigma - ref_sigma(t))});
  }
  o.require(vp < 1e-12, "variance preserving");
  o.require(ref < 1e-12, "reference schedule");
  o.require(logsnr_cosine(0.0, base) == 10.0 && logsnr_cosine(1.0, base) == -10.0, "endpoints");

  const FrequencyGrid g(8);
  bool in_range = true, decreasing = true;
  double d_ref = 0.0;
  for (double sb : {0.0, 1.0, 10.0, 20.0}) {
    for (BlurShape shape : {BlurShape::sin_squared, BlurShape::sin}) {
      const ScheduleParams p = params_with(sb, 8, shape);
      Eigen::ArrayXXd prev = Eigen::ArrayXXd::Constant(8, 8, INFINITY);
      for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        const DiffusionCoeffs c = alpha_sigma(t, g, p);
        const Eigen::ArrayXXd d = frequency_scaling(t, g, p);
        in_range = in_range && (d >= p.d_min).all() && (d <= 1.0).all();
        const Eigen::ArrayXXd ls = (c.alpha.square() / (c.sigma * c.sigma)).log();
        decreasing = decreasing && (ls < prev).all();
        prev = ls;
        if (shape == BlurShape::sin_squared) {
          for (Index k = 0; k < 8; ++k) {
            for (Index l = 0; l < 8; ++l) {
              const double r = ref_d(t, ref_lambda(k, l, 8), sb);
              d_ref = std::max(d_ref, std::abs(d(k, l) - r) / r);
            }
          }
        }
      }
    }
  }
  o.require(in_range, "d range");
  o.require(decreasing, "log-SNR strictly decreasing");
  o.require(d_ref < 1e-10, "reference d");
  o.detail << " vp=" << sci(vp) << " d_rel=" << sci(d_ref);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const Index n = 8;
  const FrequencyGrid g(n);
  const double sigma = 0.3, sb = 3.0;
  const Image x = random_image(3, n);
  const Spectrum ux = dct2(x);
  const long draws = 200000;
  double zm = 0.0, zv = 0.0;
  for (double t : {0.2, 0.5, 0.9}) {
    Eigen::ArrayXXd d(n, n);
    for (Index k = 0; k < n; ++k)
      for (Index l = 0; l < n; ++l) d(k, l) = ref_d(t, ref_lambda(k, l, n), sb);
    // Fixed-noise heat dissipation: alpha = d_t, sigma constant.
    const DiffusionCoeffs c{frequency_scaling(t, g, params_with(sb, n)), sigma, t};
    GridMoments m(n, n);
    for (long i = 0; i < draws; ++i) {
      CounterRng r(5, StreamPurpose::test, 30, static_cast<std::uint32_t>(i));
      m.add(dct2(diffuse(x, c, normal_image(r, 1, n)))[0].array());
    }
    const Eigen::ArrayXXd var = Eigen::ArrayXXd::Constant(n, n, sigma * sigma);
    zm = std::max(zm, ((m.mean() - d * ux[0].array()).abs() / GridMoments::mean_se(var, draws)).maxCoeff());
    zv = std::max(zv, ((m.variance() - var).abs() / GridMoments::var_se(var, draws)).maxCoeff());
  }
  o.require(zm < 4.0, "mean");
  o.require(zv < 4.0, "variance");
  o.detail << " max_mean_z=" << sci(zm) << " max_var_z=" << sci(zv);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const Index n = 8;
  const FrequencyGrid g(n);
  const ScheduleParams p = params_with(20.0, n);
  const double s = 0.3, t = 0.6;
  const DiffusionCoeffs cs = alpha_sigma(s, g, p), ct = alpha_sigma(t, g, p);
  const TransitionCoeffs tr = transition_coeffs(cs, ct);
  const double alg = std::max((tr.alpha_ts * cs.alpha - ct.alpha).abs().maxCoeff(),
                              (tr.alpha_ts.square() * cs.sigma * cs.sigma + tr.sigma2_ts - ct.sigma * ct.sigma)
                                  .abs()
                                  .maxCoeff());
  o.require(alg < 1e-12, "identities");

  const Image x = random_image(4, n);
  const long draws = 200000;
  GridMoments two(n, n), one(n, n);
  for (long i = 0; i < draws; ++i) {
    CounterRng r(6, StreamPurpose::test, 31, static_cast<std::uint32_t>(i));
    const Image zs = diffuse(x, cs, normal_image(r, 1, n));
    two.add(dct2(markov_step(zs, tr, normal_image(r, 1, n)))[0].array());
    one.add(dct2(diffuse(x, ct, normal_image(r, 1, n)))[0].array());
  }
  const Eigen::ArrayXXd var = Eigen::ArrayXXd::Constant(n, n, ct.sigma * ct.sigma);
  // Two independent sample sets: standard errors add in quadrature.
  const double zm = ((two.mean() - one.mean()).abs() / (2.0 * var / draws).sqrt()).maxCoeff();
  const double zv = ((two.variance() - one.variance()).abs() / (std::sqrt(2.0) * GridMoments::var_se(var, draws))).maxCoeff();
  o.require(zm < 4.0, "mean");
  o.require(zv < 4.0, "variance");
  o.detail << " identities=" << sci(alg) << " mean_z=" << sci(zm) << " var_z=" << sci(zv);
  return o;
}

Outcome criterion5() {
  Outcome o;
  CounterRng r(7, StreamPurpose::test, 32);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double s = 0.95 * r.uniform();
    const double t = s + 0.02 + (0.98 - s) * r.uniform();
    const double sb = 20.0 * r.uniform();
    const double lambda = 2.0 * kPi * kPi * r.uniform();
    const double as = ref_a(s) * ref_d(s, lambda, sb), ss = ref_sigma(s);
    const double at = ref_a(t) * ref_d(t, lambda, sb), st = ref_sigma(t);
    const DiffusionCoeffs cs{Eigen::ArrayXXd::Constant(1, 1, as), ss, s};
    const DiffusionCoeffs ct{Eigen::ArrayXXd::Constant(1, 1, at), st, t};
    const PosteriorCoeffs pc = posterior_coeffs(cs, ct);
    const double ux = 2.0 * r.normal();
    const double ut = at * ux + st * r.normal();
    Spectrum u_t = Spectrum::constant(1, 1, ut);
    Spectrum u_eps = Spectrum::constant(1, 1, (ut - at * ux) / st);
    const double mu = posterior_mean(u_t, u_eps, pc)(0, 0, 0);
    const auto [mean, var] = bayes_grid(as, ss, at, st, ux, ut);
    worst_mean = std::max(worst_mean, std::abs(mu - mean));
    worst_var = std::max(worst_var, std::abs(pc.sigma2_denoise(0, 0) - var));
  }
  o.require(worst_mean < 1e-4, "mean");
  o.require(worst_var < 1e-4, "variance");
  o.detail << " configs=50 mean_err=" << sci(worst_mean) << " var_err=" << sci(worst_var);
  return o;
}

Outcome criterion6() {
  Outcome o;
  const Index n = 8;
  const FrequencyGrid g(n);
  const ScheduleParams p = params_with(0.0, n);
  const Image x = random_image(5, n), eps = random_image(6, n);

  double forward = 0.0, post = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    forward = std::max(forward, max_abs_diff(diffuse(x, t, eps, g, p), ref_a(t) * x + ref_sigma(t) * eps));
  }
  for (int i = 1; i <= 100; ++i) {
    const double s = (i - 1) / 100.0, t = i / 100.0;
    const double ats = ref_a(t) / ref_a(s);
    const double s2ts = ref_sigma(t) * ref_sigma(t) - ats * ats * ref_sigma(s) * ref_sigma(s);
    const double var = s2ts * ref_sigma(s) * ref_sigma(s) / (ref_sigma(t) * ref_sigma(t));
    const Image z = diffuse(x, t, eps, g, p);
    const Image xh = (1.0 / ref_a(t)) * (z - ref_sigma(t) * eps);
    const Image mu = (ats * ref_sigma(s) * ref_sigma(s) / (ref_sigma(t) * ref_sigma(t))) * z +
                     (ref_a(s) * s2ts / (ref_sigma(t) * ref_sigma(t))) * xh;
    const PosteriorCoeffs pc = posterior_coeffs(s, t, g, p);
    post = std::max({post, ((pc.sigma2_denoise - var).abs() / var).maxCoeff(),
                     max_abs_diff(idct2(posterior_mean(z, eps, pc)), mu)});
  }

  // Isotropic ancestral sampler in pixel space sharing the noise streams.
  const GaussianDataPrior prior = GaussianDataPrior::power_law(g, 1.0, 0.5);
  const GaussianOracleDenoiser oracle(prior, 1);
  SamplerConfig cfg;
  cfg.steps = 50;
  cfg.batch = 2;
  cfg.seed = 9;
  cfg.trajectory_stride = 1;
  const auto snaps = sample_trajectory(oracle, cfg, g, p);
  double sampler = 0.0;
  for (std::uint32_t b = 0; b < 2; ++b) {
    CounterRng init(9, StreamPurpose::sampler_init, b);
    Image z = normal_image(init, 1, n);
    sampler = std::max(sampler, max_abs_diff(z, snaps[0].batch[b]));
    for (Index i = cfg.steps; i >= 1; --i) {
      const double t = static_cast<double>(i) / cfg.steps, s = static_cast<double>(i - 1) / cfg.steps;
      const Image e = oracle.predict_eps(z, alpha_sigma(t, g, p));
      const double at = ref_a(t), st = ref_sigma(t), as = ref_a(s), ss = ref_sigma(s);
      const double ats = at / as, s2ts = st * st - ats * ats * ss * ss;
      const Image xh = (1.0 / at) * (z - st * e);
      CounterRng step(9, StreamPurpose::sampler_step, b, static_cast<std::uint32_t>(i));
      z = (ats * ss * ss / (st * st)) * z + (as * s2ts / (st * st)) * xh +
          std::sqrt(s2ts * ss * ss / (st * st)) * normal_image(step, 1, n);
      const auto k = static_cast<std::size_t>(cfg.steps - i + 1);
      sampler = std::max(sampler, max_abs_diff(z, snaps[k].batch[b]) / std::max(1.0, z.max_abs()));
    }
  }
  o.require(forward < 1e-10, "forward");
  o.require(post < 1e-10, "posterior");
  o.require(sampler < 1e-10, "sampler");
  o.detail << " forward=" << sci(forward) << " posterior=" << sci(post) << " sampler=" << sci(sampler);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const Index n = 8;
  const FrequencyGrid g(n);
  GaussianDataPrior prior = GaussianDataPrior::power_law(g, 1.0);
  CounterRng mr(8, StreamPurpose::test, 33);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) prior.mean(k, l) = 0.5 * prior.std(k, l) * mr.normal();
  const GaussianOracleDenoiser oracle(prior, 1);
  SamplerConfig cfg;
  cfg.steps = 1000;
  cfg.batch = 10000;
  cfg.seed = 11;
  const auto out = sample(oracle, cfg, g, params_with(20.0, n));
  GridMoments m(n, n);
  for (const Image& x : out) m.add(dct2(x)[0].array());
  const Eigen::ArrayXXd var = prior.std.square();
  const double zm = ((m.mean() - prior.mean).abs() / GridMoments::mean_se(var, cfg.batch)).maxCoeff();
  double rel = 0.0;
  const auto order = g.ordered_by_frequency();
  for (std::size_t k = 0; k < 10; ++k) {
    const auto [i, j] = order[k];
    rel = std::max(rel, std::abs(m.variance()(i, j) - var(i, j)) / var(i, j));
  }
  o.require(zm < 4.0, "mean");
  o.require(rel < 0.05, "low-frequency variance");
  o.detail << " samples=10000 mean_z=" << sci(zm) << " low_var_rel=" << sci(rel);
  return o;
}

struct TrainedRun {
  double first_smoothed = 0.0;
  double last_smoothed = 0.0;
  double spectral_distance = 0.0;
};

TrainedRun train_bars(Prediction prediction, double lr, std::uint64_t seed, bool sample_spectrum) {
  ToyDatasetSpec spec;
  const Dataset data = generate_toy_dataset(spec, 1);
  const FrequencyGrid g(8);
  const ScheduleParams p = params_with(20.0, 8);
  Architecture arch;
  arch.prediction = prediction;
  TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  const TrainResult r = train(MlpDenoiser::initialized(arch, seed), data, g, p, cfg);
  TrainedRun out{r.history.front().ema_loss, r.history.back().ema_loss, 0.0};
  if (sample_spectrum) {
    SamplerConfig sc;
    sc.batch = 500;
    sc.seed = seed;
    const auto samples = sample(NetworkDenoiser(r.model), sc, g, p);
    // Held-out reference: same generator, different dataset seed.
    const Dataset held_out = generate_toy_dataset(spec, 2);
    out.spectral_distance = compare_spectra(samples, held_out.images, 10).log_spectral_distance;
  }
  return out;
}

Outcome criterion8() {
  Outcome o;
  // Gradient check on the default architecture.
  Architecture arch;
  MlpDenoiser net(arch);
  CounterRng r(12, StreamPurpose::test, 34);
  Eigen::VectorXd theta(arch.parameter_count());
  for (Index k = 0; k < theta.size(); ++k) theta(k) = 0.05 * r.normal();
  net.set_parameters(theta);
  const Index b = 8;
  Eigen::MatrixXd z(arch.pixel_dim(), b), y(arch.pixel_dim(), b), skip(arch.pixel_dim(), b);
  Eigen::VectorXd t(b);
  for (Index i = 0; i < b; ++i) {
    t(i) = r.uniform();
    for (Index k = 0; k < arch.pixel_dim(); ++k) {
      z(k, i) = r.normal();
      y(k, i) = r.normal();
      skip(k, i) = r.normal();
    }
  }
  Eigen::VectorXd grad;
  net.loss_and_gradient(z, t, y, &grad, &skip);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const Index k = c == 0 ? theta.size() - 1 : static_cast<Index>(r.below(static_cast<std::uint64_t>(theta.size())));
    const double h = 1e-5;
    Eigen::VectorXd tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    net.set_parameters(tp);
    const double lp = net.loss_and_gradient(z, t, y, nullptr, &skip);
    net.set_parameters(tm);
    const double lm = net.loss_and_gradient(z, t, y, nullptr, &skip);
    const double fd = (lp - lm) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad(k)) / std::max({std::abs(fd), std::abs(grad(k)), 1e-6}));
  }
  o.require(worst < 1e-4, "gradient");

  ToyDatasetSpec spec;
  const Dataset data = generate_toy_dataset(spec, 1);
  const std::vector<Image> batch(data.images.begin(), data.images.begin() + 256);
  const double zero_loss =
      loss(MlpDenoiser::initialized(Architecture{}, 0), batch, FrequencyGrid(8), params_with(20.0, 8), 0, 0, false).loss;
  o.require(std::abs(zero_loss - 1.0) < 0.1, "zero-init loss");

  // Reference run: default configuration, seed 0.
  const TrainedRun ref = train_bars(Prediction::eps, 2e-4, 0, false);
  o.require(ref.last_smoothed < 0.5 * ref.first_smoothed, "bars halving");

  const TrainedRun eps = train_bars(Prediction::eps, 1e-3, 0, true);
  const TrainedRun xp = train_bars(Prediction::x, 1e-3, 0, true);
  o.require(eps.spectral_distance < xp.spectral_distance, "eps beats x");

  o.detail << " grad_rel=" << sci(worst) << " zero_loss=" << zero_loss << " smoothed " << ref.first_smoothed << "->"
           << ref.last_smoothed << " lsd_eps=" << eps.spectral_distance << " lsd_x=" << xp.spectral_distance;
  return o;
}

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Byte comparison of every regular file under two directories.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (files.empty() || files.size() != count_b) {
    why = a.filename().string() + ": file sets differ";
    return false;
  }
  for (const auto& f : files) {
    if (slurp(a / f) != slurp(b / f)) {
      why = (a.filename() / f).string() + " differs";
      return false;
    }
  }
  return true;
}

Outcome criterion9(const std::string& cli, const fs::path& scratch) {
  Outcome o;
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  const fs::path cfg = scratch / "small.cfg";
  std::ofstream(cfg) << "hidden = 32,32\ntrain_steps = 40\nbatch_size = 16\ndataset_count = 200\nT = 40\n"
                        "sample_batch = 120\nrecord_trajectory = true\ntrajectory_stride = 10\n";
  const fs::path oracle_cfg = scratch / "oracle.cfg";
  std::ofstream(oracle_cfg) << "denoiser = oracle\nT = 30\nsample_batch = 8\n";

  const std::string c = " --config " + cfg.string() + " --seed 3 --out ";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"inspect", cli + " inspect-schedule" + c},
      {"data", cli + " gen-data" + c},
      {"train", cli + " train" + c},
      {"sample", cli + " sample" + c + "%OUT% --checkpoint " + (scratch / "train.a" / "checkpoint.bdfm").string()},
      {"oracle", cli + " sample --config " + oracle_cfg.string() + " --seed 3 --out "},
      {"psd", cli + " psd" + c + "%OUT% --samples " + (scratch / "sample.a" / "samples.bdt").string() +
                  " --reference " + (scratch / "data.a" / "dataset.bdt").string()},
  };
  bool identical = true;
  std::string why;
  for (const auto& [name, base] : commands) {
    const fs::path out = scratch / name;
    std::string cmd = base;
    const auto pos = cmd.find("%OUT%");
    if (pos == std::string::npos) {
      cmd += out.string();
    } else {
      cmd.replace(pos, 5, out.string());
    }
    // Both runs write to the same path so the recorded out_dir matches.
    bool ok = run(cmd) == 0;
    fs::rename(out, scratch / (name + ".a"));
    ok = ok && run(cmd) == 0;
    fs::rename(out, scratch / (name + ".b"));
    if (!ok) {
      identical = false;
      why = name + " failed";
      break;
    }
    if (!same_tree(scratch / (name + ".a"), scratch / (name + ".b"), why)) {
      identical = false;
      break;
    }
  }
  o.require(identical, "byte-identical: " + why);

  const fs::path vout = scratch / "verify";
  const int rc = run(cli + " verify --out " + vout.string());
  const std::string report = slurp(vout / "verify.txt");
  o.require(rc == 0, "verify exit status " + std::to_string(rc));
  o.require(report.find("MANIFEST covered=35 declared=35") != std::string::npos, "manifest");
  o.require(report.find("RESULT PASS") != std::string::npos, "verify result");
  const int bad = run(cli + " verify --corrupt-dct --out " + (scratch / "verify_bad").string());
  o.require(bad == 1, "negative control");
  o.detail << " commands=" << commands.size() << " verify_exit=" << rc << " corrupt_exit=" << bad;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <blurdiff-cli> <scratch-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 transform suite", criterion1},
      {"2 schedule suite", criterion2},
      {"3 heat dissipation equivalence", criterion3},
      {"4 markov consistency", criterion4},
      {"5 posterior correctness", criterion5},
      {"6 ddpm reduction", criterion6},
      {"7 gaussian oracle end-to-end", criterion7},
      {"8 trainer", criterion8},
      {"9 reproducibility", [&] { return criterion9(cli, scratch); }},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << ":" << o.detail.str() << std::endl;
  }
  std::cout << (failed == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " (" << 9 - failed << "/9)" << std::endl;
  return failed == 0 ? 0 : 1;
}
