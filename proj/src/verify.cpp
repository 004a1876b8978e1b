#include "blurdiff/verify.hpp"

#include "blurdiff/checkpoint.hpp"
#include "blurdiff/config.hpp"
#include "blurdiff/dataset.hpp"
#include "blurdiff/diffusion.hpp"
#include "blurdiff/io.hpp"
#include "blurdiff/rng.hpp"
#include "blurdiff/sampler.hpp"
#include "blurdiff/stats.hpp"
#include "blurdiff/train.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace blurdiff {
namespace {

constexpr double kBlurHeatBound = 1e-6;  // calibrated at N = 32, sigma_B in {1, 2}

const std::vector<std::string_view> kInvariants = {
    "transform.orthogonality",
    "transform.roundtrip",
    "transform.parseval",
    "transform.linearity",
    "transform.semigroup",
    "transform.frequency_grid",
    "transform.blur_heat_correspondence",
    "schedule.variance_preserving",
    "schedule.logsnr_endpoints",
    "schedule.d_range",
    "schedule.logsnr_monotone",
    "schedule.frequency_ordering",
    "schedule.dc_unblurred",
    "schedule.transition_identities",
    "schedule.posterior_bounds",
    "schedule.posterior_bayes_grid",
    "schedule.scale_invariance",
    "diffusion.markov_algebra",
    "diffusion.markov_monte_carlo",
    "diffusion.eps_x_duality",
    "diffusion.ddpm_reduction",
    "diffusion.heat_equivalence",
    "diffusion.pixel_marginal",
    "diffusion.posterior_two_forms",
    "denoiser.oracle_optimality",
    "denoiser.gradient_check",
    "denoiser.ema",
    "denoiser.zero_init_loss",
    "sampler.ddpm_reduction",
    "sampler.small_step_consistency",
    "sampler.no_nan",
    "sampler.determinism",
    "cli.config_roundtrip",
    "cli.deterministic_bytes",
    "cli.pixel_mapping",
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Image random_image(CounterRng& rng, Index ch, Index n) { return normal_image(rng, ch, n); }

double max_abs_diff(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& b) { return (a - b).abs().maxCoeff(); }

template <typename T>
double max_abs_diff(const T& a, const T& b) {
  double m = 0.0;
  for (Index c = 0; c < a.channels(); ++c) m = std::max(m, (a[c] - b[c]).cwiseAbs().maxCoeff());
  return m;
}

ScheduleParams params_with(double sigma_b_max, BlurShape shape, Index n) {
  ScheduleParams p;
  p.sigma_b_max = sigma_b_max;
  p.blur_shape = shape;
  p.size = n;
  return p;
}

// Independently coded scalar cosine schedule for the isotropic reference.
std::pair<double, double> scalar_cosine(double t) {
  double logsnr;
  if (t == 0.0) {
    logsnr = 10.0;
  } else if (t == 1.0) {
    logsnr = -10.0;
  } else {
    const double hi = std::atan(std::exp(-5.0));
    const double lo = std::atan(std::exp(5.0)) - hi;
    logsnr = -2.0 * std::log(std::tan(lo * t + hi));
  }
  return {std::sqrt(1.0 / (1.0 + std::exp(-logsnr))), std::sqrt(1.0 / (1.0 + std::exp(logsnr)))};
}

struct Checker {
  const VerifyOptions& opt;
  VerifyReport report;

  void add(std::string id, bool ok, std::string detail) {
    report.checks.push_back({std::move(id), ok, std::move(detail)});
  }

  void guard(const std::string& id, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(id, false, std::string("threw: ") + e.what());
    }
  }

  // ---------------------------------------------------------------- transform
  void transform_checks() {
    guard("transform.orthogonality", [&] {
      double worst = 0.0;
      for (Index n = 1; n <= 16; ++n) {
        Eigen::MatrixXd c = dct_matrix(n);
        if (opt.corrupt_dct && n == 8) c(3, 5) += 1e-3;
        worst = std::max(worst, (c.transpose() * c - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
      }
      add("transform.orthogonality", worst < 1e-10, "max|V^T V - I| = " + sci(worst) + " over N=1..16 (< 1e-10)");
    });
    guard("transform.roundtrip", [&] {
      CounterRng rng(opt.seed, StreamPurpose::test, 1);
      double worst = 0.0;
      for (Index n : {1, 2, 3, 5, 8, 16, 31, 64}) {
        const Image x = random_image(rng, 2, n);
        const Spectrum u = Spectrum(random_image(rng, 2, n).planes());
        worst = std::max({worst, max_abs_diff(idct2(dct2(x)), x), max_abs_diff(dct2(idct2(u)), u)});
      }
      add("transform.roundtrip", worst < 1e-10, "max roundtrip error " + sci(worst) + " for N <= 64 (< 1e-10)");
    });
    guard("transform.parseval", [&] {
      CounterRng rng(opt.seed, StreamPurpose::test, 2);
      double worst = 0.0;
      for (Index n : {1, 4, 8, 32, 64}) {
        const Image x = random_image(rng, 3, n);
        const Spectrum u = dct2(x);
        double ex = 0.0, eu = 0.0;
        for (Index c = 0; c < 3; ++c) {
          ex += x[c].squaredNorm();
          eu += u[c].squaredNorm();
        }
        worst = std::max(worst, std::abs(ex - eu) / ex);
      }
      add("transform.parseval", worst < 1e-10, "relative energy change " + sci(worst) + " (< 1e-10)");
    });
    guard("transform.linearity", [&] {
      CounterRng rng(opt.seed, StreamPurpose::test, 3);
      const Image x = random_image(rng, 1, 16);
      const Image y = random_image(rng, 1, 16);
      const double a = 0.7, b = -1.3;
      const double err = max_abs_diff(dct2(a * x + b * y), a * dct2(x) + b * dct2(y));
      add("transform.linearity", err < 1e-10, "max error " + sci(err) + " (< 1e-10)");
    });
    guard("transform.semigroup", [&] {
      CounterRng rng(opt.seed, StreamPurpose::test, 4);
      const FrequencyGrid grid(16);
      const Image x = random_image(rng, 1, 16);
      const double err = max_abs_diff(dissipate(dissipate(x, grid, 0.3), grid, 1.1), dissipate(x, grid, 1.4));
      add("transform.semigroup", err < 1e-10, "|A_0.3 A_1.1 x - A_1.4 x| = " + sci(err) + " (< 1e-10)");
    });
    guard("transform.frequency_grid", [&] {
      bool ok = true;
      for (Index n : {1, 2, 7, 8, 32}) {
        const FrequencyGrid g(n);
        ok = ok && g(0, 0) == 0.0 && (g.lambda() == g.lambda().transpose()).all();
        for (Index i = 0; i < n; ++i) {
          for (Index j = 0; j < n; ++j) {
            const double want = std::numbers::pi * std::numbers::pi * static_cast<double>(i * i + j * j) /
                                static_cast<double>(n * n);
            ok = ok && std::abs(g(i, j) - want) <= 1e-12 * std::max(1.0, want);
          }
        }
      }
      add("transform.frequency_grid", ok, "lambda(0,0) = 0, symmetric, pi^2 (i^2 + j^2) / N^2");
    });
    guard("transform.blur_heat_correspondence", [&] {
      const Index n = 32;
      const FrequencyGrid grid(n);
      Image x(1, n);
      for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) {
          const double dr = (static_cast<double>(r) - 13.0) / 6.0, dc = (static_cast<double>(c) - 18.0) / 5.0;
          x(0, r, c) = std::exp(-0.5 * (dr * dr + dc * dc)) + 0.3 * std::cos(0.2 * static_cast<double>(r));
        }
      }
      double worst = 0.0;
      for (double sb : {1.0, 2.0}) {
        const Image fast = dissipate(x, grid, 0.5 * sb * sb);
        const Index radius = static_cast<Index>(std::ceil(8.0 * sb));
        // Half-sample symmetric extension, the boundary the DCT-II implies.
        const auto reflect = [n](Index i) {
          const Index period = 2 * n;
          i = ((i % period) + period) % period;
          return i < n ? i : period - 1 - i;
        };
        for (Index r = radius; r < n - radius; ++r) {
          for (Index c = radius; c < n - radius; ++c) {
            double acc = 0.0;
            for (Index dr = -radius; dr <= radius; ++dr) {
              for (Index dc = -radius; dc <= radius; ++dc) {
                const double w = std::exp(-0.5 * static_cast<double>(dr * dr + dc * dc) / (sb * sb)) /
                                 (2.0 * std::numbers::pi * sb * sb);
                acc += w * x(0, reflect(r + dr), reflect(c + dc));
              }
            }
            worst = std::max(worst, std::abs(acc - fast(0, r, c)));
          }
        }
      }
      add("transform.blur_heat_correspondence", worst < kBlurHeatBound,
          "interior |heat - gaussian conv| = " + sci(worst) + " (< " + sci(kBlurHeatBound) + ")");
    });
  }

  // ----------------------------------------------------------------- schedule
  void schedule_checks() {
    const ScheduleParams base;
    guard("schedule.variance_preserving", [&] {
      double worst = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const NoiseLevels l = noise_scaling_cosine(i / 1000.0, base);
        worst = std::max(worst, std::abs(l.a * l.a + l.sigma * l.sigma - 1.0));
      }
      add("schedule.variance_preserving", worst < 1e-12, "max|a^2 + sigma^2 - 1| = " + sci(worst) + " (< 1e-12)");
    });
    guard("schedule.logsnr_endpoints", [&] {
      const bool ok = logsnr_cosine(0.0, base) == 10.0 && logsnr_cosine(1.0, base) == -10.0;
      add("schedule.logsnr_endpoints", ok, "logsnr(0) = +10 and logsnr(1) = -10 exactly");
    });

    const std::vector<double> sigmas = {0.0, 1.0, 10.0, 20.0};
    const std::vector<BlurShape> shapes = {BlurShape::sin_squared, BlurShape::sin};
    const FrequencyGrid grid(8);

    guard("schedule.d_range", [&] {
      bool ok = true;
      double lowest = 1.0;
      for (double sb : sigmas) {
        for (BlurShape sh : shapes) {
          const ScheduleParams p = params_with(sb, sh, 8);
          for (int i = 0; i <= 1000; ++i) {
            const Eigen::ArrayXXd d = frequency_scaling(i / 1000.0, grid, p);
            lowest = std::min(lowest, d.minCoeff());
            ok = ok && (d >= p.d_min).all() && (d <= 1.0).all();
          }
        }
      }
      add("schedule.d_range", ok, "d_t in [d_min, 1]; min observed " + sci(lowest));
    });
    guard("schedule.logsnr_monotone", [&] {
      bool ok = true;
      double tightest = INFINITY;
      for (double sb : sigmas) {
        for (BlurShape sh : shapes) {
          const ScheduleParams p = params_with(sb, sh, 8);
          Eigen::ArrayXXd prev = alpha_sigma(0.0, grid, p).logsnr();
          for (int i = 1; i <= 1000; ++i) {
            const Eigen::ArrayXXd cur = alpha_sigma(i / 1000.0, grid, p).logsnr();
            tightest = std::min(tightest, (prev - cur).minCoeff());
            ok = ok && (cur < prev).all();
            prev = cur;
          }
        }
      }
      add("schedule.logsnr_monotone", ok,
          "per-frequency logSNR strictly decreasing on 1001 points, sigma_B in {0,1,10,20}, both shapes; "
          "smallest drop " + sci(tightest));
    });
    guard("schedule.frequency_ordering", [&] {
      bool ok = true;
      const auto order = grid.ordered_by_frequency();
      for (double sb : {1.0, 10.0, 20.0}) {
        for (BlurShape sh : shapes) {
          const ScheduleParams p = params_with(sb, sh, 8);
          for (int i = 0; i <= 100; ++i) {
            const Eigen::ArrayXXd a = alpha_sigma(i / 100.0, grid, p).alpha;
            for (std::size_t k = 1; k < order.size(); ++k) {
              ok = ok && a(order[k].first, order[k].second) <= a(order[k - 1].first, order[k - 1].second);
            }
          }
        }
      }
      add("schedule.frequency_ordering", ok, "lambda_a <= lambda_b implies alpha_a >= alpha_b");
    });
    guard("schedule.dc_unblurred", [&] {
      bool ok = true;
      for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        const double ref = alpha_sigma(t, grid, params_with(0.0, BlurShape::sin_squared, 8)).alpha(0, 0);
        for (double sb : sigmas) {
          const DiffusionCoeffs c = alpha_sigma(t, grid, params_with(sb, BlurShape::sin_squared, 8));
          ok = ok && c.alpha(0, 0) == ref && c.alpha(0, 0) == noise_scaling_cosine(t, base).a;
        }
      }
      add("schedule.dc_unblurred", ok, "alpha(0,0) == a_t for every sigma_B");
    });
    guard("schedule.transition_identities", [&] {
      double worst = 0.0;
      bool positive = true;
      for (double sb : sigmas) {
        const ScheduleParams p = params_with(sb, BlurShape::sin_squared, 8);
        for (auto [s, t] : {std::pair{0.0, 0.001}, {0.3, 0.7}, {0.4, 0.6}, {0.999, 1.0}}) {
          const DiffusionCoeffs cs = alpha_sigma(s, grid, p), ct = alpha_sigma(t, grid, p);
          const TransitionCoeffs tr = transition_coeffs(cs, ct);
          worst = std::max(worst, max_abs_diff(tr.alpha_ts * cs.alpha, ct.alpha));
          worst = std::max(worst, (tr.alpha_ts.square() * cs.sigma * cs.sigma + tr.sigma2_ts - ct.sigma * ct.sigma)
                                      .abs().maxCoeff());
          positive = positive && (tr.sigma2_ts > 0.0).all();
        }
      }
      add("schedule.transition_identities", worst < 1e-12 && positive,
          "composition and variance identities to " + sci(worst) + " (< 1e-12), sigma2_ts > 0");
    });
    guard("schedule.posterior_bounds", [&] {
      bool ok = true;
      for (double sb : sigmas) {
        const ScheduleParams p = params_with(sb, BlurShape::sin_squared, 8);
        for (auto [s, t] : {std::pair{0.0, 0.001}, {0.3, 0.7}, {0.5, 0.501}}) {
          const DiffusionCoeffs cs = alpha_sigma(s, grid, p), ct = alpha_sigma(t, grid, p);
          const TransitionCoeffs tr = transition_coeffs(cs, ct);
          const PosteriorCoeffs pc = posterior_coeffs(cs, ct);
          const double slack = 1.0 + 1e-12;
          ok = ok && (pc.sigma2_denoise <= slack * cs.sigma * cs.sigma).all() &&
               (pc.sigma2_denoise <= slack * tr.sigma2_ts / tr.alpha_ts.square()).all();
        }
      }
      add("schedule.posterior_bounds", ok, "sigma2_denoise <= min(sigma_s^2, sigma2_ts / alpha_ts^2)");
    });
    guard("schedule.posterior_bayes_grid", [&] {
      // One scalar dimension: q(u_s | u_t, u_x) by brute-force quadrature.
      const double as = 0.9, ss = 0.436, at = 0.6, st = 0.8;
      const double ux = 0.37, ut = 0.25;
      DiffusionCoeffs cs{Eigen::ArrayXXd::Constant(1, 1, as), ss, 0.4};
      DiffusionCoeffs ct{Eigen::ArrayXXd::Constant(1, 1, at), st, 0.6};
      const TransitionCoeffs tr = transition_coeffs(cs, ct);
      const PosteriorCoeffs pc = posterior_coeffs(cs, ct);
      const double ats = tr.alpha_ts(0, 0), s2ts = tr.sigma2_ts(0, 0);
      double w = 0.0, m1 = 0.0, m2 = 0.0;
      const double lo = as * ux - 10.0 * ss, hi = as * ux + 10.0 * ss;
      const int cells = 200000;
      const double h = (hi - lo) / cells;
      for (int k = 0; k <= cells; ++k) {
        const double us = lo + k * h;
        const double lp = -0.5 * (ut - ats * us) * (ut - ats * us) / s2ts - 0.5 * (us - as * ux) * (us - as * ux) / (ss * ss);
        const double wk = std::exp(lp) * ((k == 0 || k == cells) ? 0.5 : 1.0);
        w += wk;
        m1 += wk * us;
        m2 += wk * us * us;
      }
      const double mean = m1 / w, var = m2 / w - mean * mean;
      const double eps_hat = (ut - at * ux) / st;  // the noise consistent with the true u_x
      const double mu = pc.coeff_zt(0, 0) * ut + pc.coeff_pred(0, 0) * (ut - st * eps_hat);
      const double err = std::max(std::abs(mu - mean), std::abs(pc.sigma2_denoise(0, 0) - var));
      add("schedule.posterior_bayes_grid", err < 1e-4, "quadrature vs closed form: " + sci(err) + " (< 1e-4)");
    });
    guard("schedule.scale_invariance", [&] {
      const ScheduleParams p = params_with(10.0, BlurShape::sin_squared, 8);
      const DiffusionCoeffs cs = alpha_sigma(0.3, grid, p), ct = alpha_sigma(0.6, grid, p);
      const double k = 2.5;
      DiffusionCoeffs ks{k * cs.alpha, k * cs.sigma, cs.t}, kt{k * ct.alpha, k * ct.sigma, ct.t};
      const TransitionCoeffs a = transition_coeffs(cs, ct), b = transition_coeffs(ks, kt);
      const PosteriorCoeffs pa = posterior_coeffs(cs, ct), pb = posterior_coeffs(ks, kt);
      CounterRng rng(opt.seed, StreamPurpose::test, 5);
      const Spectrum u = Spectrum(random_image(rng, 1, 8).planes());
      const Spectrum e = Spectrum(random_image(rng, 1, 8).planes());
      const double err = std::max(
          {max_abs_diff(a.alpha_ts, b.alpha_ts), max_abs_diff(k * k * a.sigma2_ts, b.sigma2_ts) / (k * k),
           max_abs_diff(k * k * pa.sigma2_denoise, pb.sigma2_denoise) / (k * k),
           max_abs_diff(k * posterior_mean(u, e, pa), posterior_mean(k * u, e, pb))});
      add("schedule.scale_invariance", err < 1e-10, "rescaling alpha and sigma by 2.5: max deviation " + sci(err));
    });
  }

  // ---------------------------------------------------------------- diffusion
  void diffusion_checks() {
    const FrequencyGrid grid(8);
    guard("diffusion.markov_algebra", [&] {
      double worst = 0.0;
      CounterRng rng(opt.seed, StreamPurpose::test, 6);
      const Image x = random_image(rng, 1, 8);
      for (double sb : {0.0, 1.0, 10.0, 20.0}) {
        for (BlurShape sh : {BlurShape::sin_squared, BlurShape::sin}) {
          const ScheduleParams p = params_with(sb, sh, 8);
          const DiffusionCoeffs cs = alpha_sigma(0.3, grid, p), ct = alpha_sigma(0.7, grid, p);
          const TransitionCoeffs tr = transition_coeffs(cs, ct);
          const Spectrum ux = dct2(x);
          worst = std::max(worst, max_abs_diff(ux.scaled(tr.alpha_ts * cs.alpha), ux.scaled(ct.alpha)));
          worst = std::max(worst, (tr.alpha_ts.square() * cs.sigma * cs.sigma + tr.sigma2_ts - ct.sigma * ct.sigma)
                                      .abs().maxCoeff());
        }
      }
      add("diffusion.markov_algebra", worst < 1e-12, "mean and variance composition to " + sci(worst));
    });
    guard("diffusion.markov_monte_carlo", [&] {
      const ScheduleParams p = params_with(10.0, BlurShape::sin_squared, 8);
      CounterRng xr(opt.seed, StreamPurpose::test, 7);
      const Image x = random_image(xr, 1, 8);
      const DiffusionCoeffs cs = alpha_sigma(0.3, grid, p), ct = alpha_sigma(0.7, grid, p);
      const TransitionCoeffs tr = transition_coeffs(cs, ct);
      GridMoments two(8, 8);
      const long draws = 20000;
      for (long i = 0; i < draws; ++i) {
        CounterRng r(opt.seed, StreamPurpose::test, 8, static_cast<std::uint32_t>(i));
        const Image zs = diffuse(x, cs, normal_image(r, 1, 8));
        two.add(dct2(markov_step(zs, tr, normal_image(r, 1, 8)))[0].array());
      }
      const Eigen::ArrayXXd want_mean = dct2(x)[0].array() * ct.alpha;
      const Eigen::ArrayXXd want_var = Eigen::ArrayXXd::Constant(8, 8, ct.sigma * ct.sigma);
      const double zm = ((two.mean() - want_mean).abs() / GridMoments::mean_se(want_var, draws)).maxCoeff();
      const double zv = ((two.variance() - want_var).abs() / GridMoments::var_se(want_var, draws)).maxCoeff();
      add("diffusion.markov_monte_carlo", zm < 4.0 && zv < 4.0,
          "two-step vs one-shot over 20000 draws: max |z| mean " + sci(zm) + ", variance " + sci(zv) + " (< 4 SE)");
    });
    guard("diffusion.eps_x_duality", [&] {
      double worst = 0.0;
      CounterRng rng(opt.seed, StreamPurpose::test, 9);
      for (double sb : {0.0, 20.0}) {
        const ScheduleParams p = params_with(sb, BlurShape::sin_squared, 8);
        for (double t : {0.0, 0.1, 0.5, 0.9, 1.0}) {
          const DiffusionCoeffs c = alpha_sigma(t, grid, p);
          const Image x = random_image(rng, 1, 8), e = random_image(rng, 1, 8);
          const Image z = diffuse(x, c, e);
          worst = std::max({worst, max_abs_diff(eps_to_x(z, e, c), x) / std::max(1.0, x.max_abs()),
                            max_abs_diff(x_to_eps(z, x, c), e),
                            max_abs_diff(x_to_eps(z, eps_to_x(z, e, c), c), e)});
        }
      }
      add("diffusion.eps_x_duality", worst < 1e-8, "eps/x conversions invert each other to " + sci(worst));
    });
    guard("diffusion.ddpm_reduction", [&] {
      const ScheduleParams p = params_with(0.0, BlurShape::sin_squared, 8);
      CounterRng rng(opt.seed, StreamPurpose::test, 10);
      double worst = 0.0;
      for (auto [s, t] : {std::pair{0.0, 0.001}, {0.2, 0.5}, {0.7, 0.701}, {0.999, 1.0}}) {
        const Image x = random_image(rng, 1, 8), e = random_image(rng, 1, 8), eh = random_image(rng, 1, 8);
        const auto [as, ss] = scalar_cosine(s);
        const auto [at, st] = scalar_cosine(t);
        const Image z_ref = at * x + st * e;
        const Image z = diffuse(x, t, e, grid, p);
        worst = std::max(worst, max_abs_diff(z, z_ref));
        const double ats = at / as, s2ts = st * st - ats * ats * ss * ss;
        const Image xh = (1.0 / at) * (z_ref - st * eh);
        const Image mu_ref = (ats * ss * ss / (st * st)) * z_ref + (as * s2ts / (st * st)) * xh;
        worst = std::max(worst, max_abs_diff(idct2(posterior_mean(z_ref, eh, s, t, grid, p)), mu_ref));
        const double var_ref = s2ts * ss * ss / (st * st);
        const PosteriorCoeffs pc = posterior_coeffs(s, t, grid, p);
        worst = std::max(worst, (pc.sigma2_denoise - var_ref).abs().maxCoeff() / var_ref);
      }
      add("diffusion.ddpm_reduction", worst < 1e-10,
          "sigma_B = 0 vs scalar reference (forward, posterior mean, relative variance): " + sci(worst));
    });
    guard("diffusion.heat_equivalence", [&] {
      const ScheduleParams p = params_with(2.0, BlurShape::sin_squared, 8);
      const double sigma = 0.3;
      CounterRng xr(opt.seed, StreamPurpose::test, 11);
      const Image x = random_image(xr, 1, 8);
      const Eigen::ArrayXXd ux = dct2(x)[0].array();
      const long draws = 20000;
      double zm = 0.0, zv = 0.0;
      for (double t : {0.25, 0.5, 0.75}) {
        DiffusionCoeffs c{frequency_scaling(t, grid, p), sigma, t};
        GridMoments m(8, 8);
        for (long i = 0; i < draws; ++i) {
          CounterRng r(opt.seed, StreamPurpose::test, 12, static_cast<std::uint32_t>(i));
          m.add(dct2(diffuse(x, c, normal_image(r, 1, 8)))[0].array());
        }
        const Eigen::ArrayXXd var = Eigen::ArrayXXd::Constant(8, 8, sigma * sigma);
        zm = std::max(zm, ((m.mean() - c.alpha * ux).abs() / GridMoments::mean_se(var, draws)).maxCoeff());
        zv = std::max(zv, ((m.variance() - var).abs() / GridMoments::var_se(var, draws)).maxCoeff());
      }
      add("diffusion.heat_equivalence", zm < 4.0 && zv < 4.0,
          "alpha := d_t, sigma := 0.3 reproduces N(A_t x, sigma^2 I) at t in {0.25,0.5,0.75}, 20000 draws: "
          "max |z| mean " + sci(zm) + ", variance " + sci(zv) + " (< 4 SE)");
    });
    guard("diffusion.pixel_marginal", [&] {
      const Index n = 4;
      const FrequencyGrid g4(n);
      const ScheduleParams p = params_with(20.0, BlurShape::sin_squared, n);
      const DiffusionCoeffs c = alpha_sigma(0.3, g4, p);
      CounterRng rng(opt.seed, StreamPurpose::test, 13);
      const Image x = random_image(rng, 1, n);
      // Dense V = C^T (x) C^T acting on row-major flattened images.
      const Eigen::MatrixXd basis = dct_matrix(n);
      Eigen::MatrixXd v(n * n, n * n);
      for (Index r = 0; r < n; ++r)
        for (Index cc = 0; cc < n; ++cc)
          for (Index k = 0; k < n; ++k)
            for (Index l = 0; l < n; ++l) v(r * n + cc, k * n + l) = basis(k, r) * basis(l, cc);
      Eigen::VectorXd a(n * n);
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) a(k * n + l) = c.alpha(k, l);
      const Eigen::VectorXd dense = v * a.asDiagonal() * v.transpose() * x.flatten();
      const PixelMarginal m = pixel_space_marginal(x, c);
      const Eigen::MatrixXd cov = v * Eigen::VectorXd::Map(m.cov_spectrum.data(), n * n).asDiagonal() * v.transpose();
      const double err = std::max((dense - m.mean.flatten()).cwiseAbs().maxCoeff(),
                                  (cov - c.sigma * c.sigma * Eigen::MatrixXd::Identity(n * n, n * n)).cwiseAbs().maxCoeff());
      add("diffusion.pixel_marginal", err < 1e-10 && m.isotropic,
          "dense V diag(alpha) V^T x and sigma^2 I covariance to " + sci(err));
    });
    guard("diffusion.posterior_two_forms", [&] {
      double worst = 0.0;
      CounterRng rng(opt.seed, StreamPurpose::test, 14);
      for (double sb : {0.0, 1.0, 20.0}) {
        const ScheduleParams p = params_with(sb, BlurShape::sin_squared, 8);
        const DiffusionCoeffs cs = alpha_sigma(0.4, grid, p), ct = alpha_sigma(0.45, grid, p);
        const TransitionCoeffs tr = transition_coeffs(cs, ct);
        const PosteriorCoeffs pc = posterior_coeffs(cs, ct);
        const Spectrum u = Spectrum(random_image(rng, 1, 8).planes());
        const Spectrum e = Spectrum(random_image(rng, 1, 8).planes());
        const Spectrum ux = eps_to_x(u, e, ct);
        const Spectrum two = (u.scaled(tr.alpha_ts / tr.sigma2_ts) + ux.scaled(cs.alpha / (cs.sigma * cs.sigma)))
                                 .scaled(pc.sigma2_denoise);
        worst = std::max(worst, max_abs_diff(posterior_mean(u, e, pc), two) / std::max(1.0, two.max_abs()));
      }
      add("diffusion.posterior_two_forms", worst < 1e-10, "coefficient form vs two-parameter form: " + sci(worst));
    });
  }

  // ----------------------------------------------------------------- denoiser
  void denoiser_checks() {
    guard("denoiser.oracle_optimality", [&] {
      const Index n = 4;
      const FrequencyGrid grid(n);
      const ScheduleParams p = params_with(10.0, BlurShape::sin_squared, n);
      const GaussianDataPrior prior = GaussianDataPrior::power_law(grid, 1.0);
      bool ok = true;
      std::string worst_margin;
      for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const DiffusionCoeffs c = alpha_sigma(t, grid, p);
        double l_zero = 0.0, l_rand = 0.0, l_oracle = 0.0;
        const int draws = 2000;
        for (int i = 0; i < draws; ++i) {
          CounterRng r(opt.seed, StreamPurpose::test, 15, static_cast<std::uint32_t>(i));
          const Spectrum ux = Spectrum(normal_image(r, 1, n).planes()).scaled(prior.std);
          const Image eps = normal_image(r, 1, n);
          const Image z = diffuse(idct2(ux), c, eps);
          const Image guess = normal_image(r, 1, n);
          l_zero += eps.flatten().squaredNorm();
          l_rand += (eps - guess).flatten().squaredNorm();
          l_oracle += (eps - idct2(oracle_eps_freq(prior, dct2(z), c))).flatten().squaredNorm();
        }
        ok = ok && l_oracle < l_zero && l_oracle < l_rand;
      }
      add("denoiser.oracle_optimality", ok, "oracle loss below zero and random predictors at t in {0.1,...,0.9}");
    });
    guard("denoiser.gradient_check", [&] {
      Architecture arch;
      arch.size = 2;
      arch.hidden = {8, 8};
      arch.time_frequencies = 4;
      MlpDenoiser net(arch);
      CounterRng r(opt.seed, StreamPurpose::test, 16);
      Eigen::VectorXd theta(arch.parameter_count());
      for (Index k = 0; k < theta.size(); ++k) theta(k) = 0.5 * r.normal();
      net.set_parameters(theta);
      const Index b = 5;
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
      const double h = 1e-5;
      for (int c = 0; c < 100; ++c) {
        // The first probe is the skip gate.
        const auto k = c == 0 ? theta.size() - 1 : static_cast<Index>(r.below(static_cast<std::uint64_t>(theta.size())));
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
      add("denoiser.gradient_check", worst < 1e-4, "central differences on 100 coordinates: max relative " + sci(worst));
    });
    guard("denoiser.ema", [&] {
      ToyDatasetSpec spec;
      spec.size = 4;
      spec.count = 32;
      const Dataset data = generate_toy_dataset(spec, opt.seed);
      Architecture arch;
      arch.size = 4;
      arch.hidden = {16};
      TrainConfig cfg;
      cfg.batch_size = 8;
      cfg.learning_rate = 1e-2;
      cfg.ema_decay = 0.9;
      cfg.seed = opt.seed;
      const FrequencyGrid grid(4);
      Trainer trainer(MlpDenoiser::initialized(arch, opt.seed), data, grid, params_with(1.0, BlurShape::sin_squared, 4), cfg);
      std::vector<Eigen::VectorXd> snaps = {trainer.model().parameters()};
      for (int i = 0; i < 10; ++i) {
        trainer.step();
        snaps.push_back(trainer.model().parameters());
      }
      const double d = cfg.ema_decay;
      const auto k_steps = static_cast<int>(snaps.size()) - 1;
      Eigen::VectorXd want = std::pow(d, k_steps) * snaps[0];
      for (int k = 1; k <= k_steps; ++k) want += (1.0 - d) * std::pow(d, k_steps - k) * snaps[static_cast<std::size_t>(k)];
      const double err = (want - trainer.ema()).cwiseAbs().maxCoeff();
      add("denoiser.ema", err < 1e-10, "EMA vs closed-form weighted trajectory over 10 steps: " + sci(err));
    });
    guard("denoiser.zero_init_loss", [&] {
      ToyDatasetSpec spec;
      spec.count = 256;
      const Dataset data = generate_toy_dataset(spec, opt.seed);
      Architecture arch;
      arch.hidden = {32};
      const MlpDenoiser net = MlpDenoiser::initialized(arch, opt.seed);
      const FrequencyGrid grid(8);
      const BatchLoss l = loss(net, data.images, grid, ScheduleParams{}, opt.seed, 0, false);
      add("denoiser.zero_init_loss", std::abs(l.loss - 1.0) < 0.1, "zero-output loss on 256 images = " + sci(l.loss) + " (1 +- 0.1)");
    });
  }

  // ------------------------------------------------------------------ sampler
  void sampler_checks() {
    guard("sampler.ddpm_reduction", [&] {
      const Index n = 4, steps = 50;
      const FrequencyGrid grid(n);
      ScheduleParams p = params_with(0.0, BlurShape::sin_squared, n);
      p.steps = steps;
      const double s_data = 0.5;
      GaussianDataPrior prior{Eigen::ArrayXXd::Zero(n, n), Eigen::ArrayXXd::Constant(n, n, s_data)};
      const GaussianOracleDenoiser oracle(prior, 1);
      SamplerConfig cfg;
      cfg.steps = steps;
      cfg.batch = 3;
      cfg.seed = opt.seed;
      cfg.trajectory_stride = 1;
      const auto traj = sample_trajectory(oracle, cfg, grid, p);
      double worst = 0.0;
      for (Index b = 0; b < cfg.batch; ++b) {
        // Isotropic reference: pixel-space noise, scalar posterior.
        CounterRng init(cfg.seed, StreamPurpose::sampler_init, static_cast<std::uint32_t>(b));
        Image z = normal_image(init, 1, n);
        for (Index i = steps; i >= 1; --i) {
          const double t = static_cast<double>(i) / steps, s = static_cast<double>(i - 1) / steps;
          const auto [at, st] = scalar_cosine(t);
          const auto [as, ss] = scalar_cosine(s);
          const Image eh = (st / (at * at * s_data * s_data + st * st)) * z;
          const Image xh = (1.0 / at) * (z - st * eh);
          const double ats = at / as, s2ts = st * st - ats * ats * ss * ss;
          CounterRng rng(cfg.seed, StreamPurpose::sampler_step, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(i));
          z = (ats * ss * ss / (st * st)) * z + (as * s2ts / (st * st)) * xh +
              std::sqrt(s2ts * ss * ss / (st * st)) * normal_image(rng, 1, n);
          const std::size_t k = static_cast<std::size_t>(steps - i + 1);
          worst = std::max(worst, max_abs_diff(traj[k].batch[static_cast<std::size_t>(b)], z));
        }
      }
      add("sampler.ddpm_reduction", worst < 1e-8, "sigma_B = 0 sampler vs isotropic reference, every step: " + sci(worst));
    });
    guard("sampler.small_step_consistency", [&] {
      const Index n = 4;
      const FrequencyGrid grid(n);
      const ScheduleParams p = params_with(10.0, BlurShape::sin_squared, n);
      const GaussianOracleDenoiser oracle(GaussianDataPrior::power_law(grid, 1.0), 1);
      SamplerConfig cfg;
      cfg.batch = 1500;
      cfg.seed = opt.seed;
      cfg.steps = 250;
      const auto a = sample(oracle, cfg, grid, p);
      cfg.steps = 500;
      cfg.seed = opt.seed + 1;
      const auto b = sample(oracle, cfg, grid, p);
      GridMoments ma(n, n), mb(n, n);
      for (const auto& img : a) ma.add(dct2(img)[0].array());
      for (const auto& img : b) mb.add(dct2(img)[0].array());
      const Eigen::ArrayXXd se = (GridMoments::var_se(ma.variance(), cfg.batch).square() +
                                  GridMoments::var_se(mb.variance(), cfg.batch).square()).sqrt();
      const double z = ((ma.variance() - mb.variance()).abs() / se).maxCoeff();
      add("sampler.small_step_consistency", z < 4.0, "T=250 vs T=500 per-frequency variances: max |z| " + sci(z) + " (< 4)");
    });
    guard("sampler.no_nan", [&] {
      const FrequencyGrid grid(8);
      const GaussianOracleDenoiser oracle(GaussianDataPrior::power_law(grid, 1.0), 1);
      bool ok = true;
      for (double sb : {0.0, 1.0, 10.0, 20.0}) {
        for (BlurShape sh : {BlurShape::sin_squared, BlurShape::sin}) {
          for (Index steps : {100, 1000}) {
            ScheduleParams p = params_with(sb, sh, 8);
            SamplerConfig cfg;
            cfg.steps = steps;
            cfg.batch = 2;
            cfg.seed = opt.seed;
            for (const auto& img : sample(oracle, cfg, grid, p)) ok = ok && img.all_finite();
          }
        }
      }
      add("sampler.no_nan", ok, "finite output for sigma_B in {0,1,10,20}, both shapes, T in {100,1000}");
    });
    guard("sampler.determinism", [&] {
      const FrequencyGrid grid(8);
      const GaussianOracleDenoiser oracle(GaussianDataPrior::power_law(grid, 1.0), 1);
      SamplerConfig cfg;
      cfg.steps = 100;
      cfg.batch = 4;
      cfg.seed = opt.seed;
      const auto a = sample(oracle, cfg, grid, ScheduleParams{});
      const auto b = sample(oracle, cfg, grid, ScheduleParams{});
      add("sampler.determinism", encode_raw_tensor(a) == encode_raw_tensor(b), "same seed gives identical bytes");
    });
  }

  // ---------------------------------------------------------------------- cli
  void cli_checks() {
    guard("cli.config_roundtrip", [&] {
      RunConfig c;
      c.schedule.sigma_b_max = 1.0 / 3.0;
      c.schedule.blur_shape = BlurShape::sin;
      c.hidden = {7, 11, 3};
      c.sampler.last_step = LastStep::mean;
      c.sampler.clip_xhat = true;
      c.train.learning_rate = 3.3e-4;
      c.dataset.kind = DatasetKind::gaussian_spectrum;
      c.train.seed = c.sampler.seed = 0xFFFFFFFFFFFFull;
      const RunConfig back = parse_config(serialize_config(c));
      add("cli.config_roundtrip", back == c && serialize_config(back) == serialize_config(c),
          "parse(serialize(config)) == config");
    });
    guard("cli.deterministic_bytes", [&] {
      ToyDatasetSpec spec;
      spec.count = 50;
      const std::string d1 = encode_raw_tensor(generate_toy_dataset(spec, opt.seed).images);
      const std::string d2 = encode_raw_tensor(generate_toy_dataset(spec, opt.seed).images);
      Architecture arch;
      arch.hidden = {8};
      const MlpDenoiser net = MlpDenoiser::initialized(arch, opt.seed);
      const Checkpoint ck{arch, net.parameters(), {}, net.parameters()};
      const bool ok = d1 == d2 && encode_checkpoint(ck) == encode_checkpoint(ck) &&
                      decode_checkpoint(encode_checkpoint(ck)).architecture == arch;
      add("cli.deterministic_bytes", ok, "dataset and checkpoint bytes reproducible");
    });
    guard("cli.pixel_mapping", [&] {
      const bool ok = pixel_byte(-1.0) == 0 && pixel_byte(1.0) == 255 && pixel_byte(0.0) == 128 &&
                      pixel_byte(-7.0) == 0 && pixel_byte(3.0) == 255;
      add("cli.pixel_mapping", ok, "v=-1 -> 0, v=0 -> 128, v=+1 -> 255, clamped outside");
    });
  }
};

}  // namespace

bool VerifyReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return manifest_complete();
}

const std::vector<std::string_view>& declared_invariants() { return kInvariants; }

VerifyReport run_verification(const VerifyOptions& options) {
  Checker checker{options, {}};
  checker.transform_checks();
  checker.schedule_checks();
  checker.diffusion_checks();
  checker.denoiser_checks();
  checker.sampler_checks();
  checker.cli_checks();

  VerifyReport report = std::move(checker.report);
  report.declared = kInvariants.size();
  report.covered = 0;
  for (std::string_view id : kInvariants) {
    const bool ran = std::any_of(report.checks.begin(), report.checks.end(), [&](const CheckResult& c) { return c.id == id; });
    if (ran) ++report.covered;
  }
  return report;
}

std::string format_report(const VerifyReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) out << (c.passed ? "PASS " : "FAIL ") << c.id << "  " << c.detail << "\n";
  out << "MANIFEST covered=" << report.covered << " declared=" << report.declared << "\n";
  out << "RESULT " << (report.all_passed() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace blurdiff
