#include <algorithm>
#include <cmath>
#include <numbers>

#include "negres/error.hpp"
#include "negres/signal.hpp"

namespace negres::signal {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Wave {
  double center_s;
  double amplitude_mv;
  double sigma_s;
};

void add_wave(std::vector<double>& x, double fs, const Wave& w) {
  if (w.amplitude_mv == 0.0) return;
  const double reach = 5.0 * w.sigma_s;
  const auto lo = static_cast<std::ptrdiff_t>(std::floor((w.center_s - reach) * fs));
  const auto hi = static_cast<std::ptrdiff_t>(std::ceil((w.center_s + reach) * fs));
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0); i <= std::min(hi, n - 1); ++i) {
    const double d = static_cast<double>(i) / fs - w.center_s;
    x[static_cast<std::size_t>(i)] +=
        w.amplitude_mv * std::exp(-d * d / (2.0 * w.sigma_s * w.sigma_s));
  }
}

// Q, R and S bumps spanning `duration` centered on the R peak; the outer
// bumps end two sigmas inside the nominal QRS boundaries.
void add_qrs(std::vector<double>& x, double fs, double r_time, double duration,
             double r_amp, double q_ratio, double s_ratio) {
  add_wave(x, fs, {r_time - 0.3 * duration, -q_ratio * r_amp, duration / 10.0});
  add_wave(x, fs, {r_time, r_amp, duration / 6.0});
  add_wave(x, fs, {r_time + 0.3 * duration, -s_ratio * r_amp, duration / 10.0});
}

}  // namespace

SynthConfig patient_variant(const SynthConfig& base, Rng& rng) {
  SynthConfig c = base;
  const double center = rng.uniform(66.0, 92.0);
  c.heart_rate_min_bpm = std::max(base.heart_rate_min_bpm, center - 6.0);
  c.heart_rate_max_bpm = std::min(base.heart_rate_max_bpm, center + 6.0);
  c.p_amplitude_mv = rng.uniform(0.08, 0.22);
  c.p_duration_s = rng.uniform(0.07, 0.11);
  const double pr = rng.uniform(0.13, 0.19);
  c.pr_interval_min_s = std::max(0.12, pr - 0.01);
  c.pr_interval_max_s = std::min(0.20, pr + 0.01);
  const double qrs = rng.uniform(0.07, 0.10);
  c.qrs_duration_min_s = std::max(0.065, qrs - 0.005);
  c.qrs_duration_max_s = std::min(0.105, qrs + 0.005);
  const double r = rng.uniform(0.8, 1.8);
  c.r_amplitude_min_mv = r * 0.9;
  c.r_amplitude_max_mv = r * 1.1;
  const double qt = rng.uniform(0.35, 0.41);
  c.qt_interval_min_s = qt - 0.01;
  c.qt_interval_max_s = qt + 0.01;
  c.t_amplitude_mv = rng.uniform(0.51, 0.70);
  c.t_duration_s = rng.uniform(0.13, 0.19);
  c.baseline_wander_mv = rng.uniform(0.02, 0.15);
  c.baseline_wander_hz = rng.uniform(0.15, 0.45);
  c.white_noise_mv = rng.uniform(0.005, 0.03);
  c.seed = mix64(base.seed ^ rng());
  return c;
}

SynthTrace synth_ecg(const SynthConfig& cfg, std::size_t n_beats, Label type) {
  if (n_beats == 0) throw ConfigError("synth_ecg: n_beats must be >= 1");
  if (!(cfg.heart_rate_min_bpm > 0.0 && cfg.heart_rate_min_bpm <= cfg.heart_rate_max_bpm)) {
    throw ConfigError("synth_ecg: invalid heart-rate range");
  }
  if (static_cast<std::size_t>(type) >= kAllLabels.size()) {
    throw ConfigError("synth_ecg: unknown beat type");
  }
  Rng rng(cfg.seed);
  Rng timing = rng.substream("timing");
  Rng shape = rng.substream("shape");
  Rng noise = rng.substream("noise");

  const double fs = kSampleRate;
  const double nominal_rr = 60.0 / timing.uniform(cfg.heart_rate_min_bpm, cfg.heart_rate_max_bpm);

  SynthTrace out;
  std::vector<double> r_times;
  double t = 0.6;
  for (std::size_t i = 0; i < n_beats; ++i) {
    double rr = nominal_rr;
    switch (type) {
      case Label::V: rr = nominal_rr * timing.uniform(0.60, 0.80); break;
      case Label::S: rr = nominal_rr * timing.uniform(0.55, 0.75); break;
      case Label::A: rr = nominal_rr * timing.uniform(0.55, 1.45); break;
      default:
        rr = std::clamp(nominal_rr * (1.0 + cfg.rr_jitter * timing.normal()), 0.60, 1.00);
        break;
    }
    if (i > 0) t += rr;
    r_times.push_back(t);
    out.rr_intervals_s.push_back(i == 0 ? nominal_rr : rr);
  }
  const double total_s = r_times.back() + 0.8;
  std::vector<double> x(static_cast<std::size_t>(std::ceil(total_s * fs)), 0.0);

  const double r_amp = shape.uniform(cfg.r_amplitude_min_mv, cfg.r_amplitude_max_mv);
  const double pr = shape.uniform(cfg.pr_interval_min_s, cfg.pr_interval_max_s);
  const double qt = shape.uniform(cfg.qt_interval_min_s, cfg.qt_interval_max_s);
  for (std::size_t i = 0; i < n_beats; ++i) {
    const double rt = r_times[i];
    const double amp = r_amp * (1.0 + 0.03 * shape.normal());
    double qrs = shape.uniform(cfg.qrs_duration_min_s, cfg.qrs_duration_max_s);
    const double p_sigma = cfg.p_duration_s / 4.0;
    const double t_sigma = cfg.t_duration_s / 4.0;
    if (type == Label::V) {
      qrs = shape.uniform(0.13, 0.17);
      add_qrs(x, fs, rt, qrs, 1.4 * amp, 0.05, 0.45);
      add_wave(x, fs, {rt + qrs / 2.0 + 0.18, -0.8 * cfg.t_amplitude_mv, 1.3 * t_sigma});
    } else {
      add_qrs(x, fs, rt, qrs, amp, 0.12, 0.25);
      const double qrs_onset = rt - qrs / 2.0;
      if (type == Label::S) {
        // Ectopic atrial focus: early, low, inverted P.
        add_wave(x, fs, {qrs_onset - 0.7 * pr + cfg.p_duration_s / 2.0,
                         -0.6 * cfg.p_amplitude_mv, 0.8 * p_sigma});
      } else if (type != Label::A) {
        add_wave(x, fs, {qrs_onset - pr + cfg.p_duration_s / 2.0, cfg.p_amplitude_mv,
                         p_sigma});
      }
      add_wave(x, fs, {qrs_onset + qt - cfg.t_duration_s / 2.0, cfg.t_amplitude_mv, t_sigma});
    }
    out.r_peaks.push_back(static_cast<std::size_t>(std::lround(rt * fs)));
    out.labels.push_back(type);
    out.qrs_durations_s.push_back(qrs);
  }

  // Fibrillatory ripple replaces organized atrial activity.
  if (type == Label::A) {
    const double fa = noise.uniform(0.04, 0.08);
    double fr[3], ph[3];
    for (int j = 0; j < 3; ++j) {
      fr[j] = noise.uniform(4.0, 8.0);
      ph[j] = noise.uniform(0.0, kTwoPi);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = static_cast<double>(i) / fs;
      double v = 0.0;
      for (int j = 0; j < 3; ++j) v += std::sin(kTwoPi * fr[j] * s + ph[j]);
      x[i] += fa * v / 1.5;
    }
  }

  double emi = cfg.emi_mv;
  if (type == Label::E) emi += noise.uniform(0.3, 0.8);
  if (emi > 0.0) {
    const double phase = noise.uniform(0.0, kTwoPi);
    const double mod_hz = noise.uniform(0.1, 0.4);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = static_cast<double>(i) / fs;
      x[i] += emi * (1.0 + 0.3 * std::sin(kTwoPi * mod_hz * s)) *
              std::sin(kTwoPi * 50.0 * s + phase);
    }
  }

  double burst_rate = cfg.motion_burst_rate_hz;
  if (type == Label::Q) burst_rate += 1.5;
  if (burst_rate > 0.0) {
    // Poisson burst arrivals over the trace.
    double s = -std::log(1.0 - noise.uniform()) / burst_rate - 0.5;
    while (s < total_s + 0.5) {
      const double width = noise.uniform(0.15, 0.40);
      const double freq = noise.uniform(0.5, 3.0);
      const double amp = cfg.motion_burst_mv * noise.uniform(0.7, 2.0) *
                         (noise.bernoulli(0.5) ? 1.0 : -1.0);
      const double phase = noise.uniform(0.0, kTwoPi);
      const auto lo = static_cast<std::ptrdiff_t>((s - 3.0 * width) * fs);
      const auto hi = static_cast<std::ptrdiff_t>((s + 3.0 * width) * fs);
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
           i < std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.size())); ++i) {
        const double d = static_cast<double>(i) / fs - s;
        x[static_cast<std::size_t>(i)] += amp * std::exp(-d * d / (2.0 * width * width)) *
                                          std::cos(kTwoPi * freq * d + phase);
      }
      s += -std::log(1.0 - noise.uniform()) / burst_rate;
    }
  }

  if (cfg.baseline_wander_mv > 0.0) {
    const double phase = noise.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += cfg.baseline_wander_mv *
              std::sin(kTwoPi * cfg.baseline_wander_hz * static_cast<double>(i) / fs + phase);
    }
  }
  if (cfg.white_noise_mv > 0.0) {
    for (double& v : x) v += cfg.white_noise_mv * noise.normal();
  }

  out.trace.samples = std::move(x);
  out.trace.sample_rate = fs;
  return out;
}

}  // namespace negres::signal
