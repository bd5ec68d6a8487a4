#include "negres/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "negres/error.hpp"

namespace negres::signal {
namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // normalized so a0 == 1

  void run(std::vector<double>& x) const {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
      const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
};

// Bilinear-transform Butterworth sections (Q = 1/sqrt 2).
Biquad butter_lowpass(double f0, double fs) {
  const double w0 = 2.0 * std::numbers::pi * f0 / fs;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double a0 = 1.0 + alpha;
  return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0, -2.0 * c / a0,
          (1.0 - alpha) / a0};
}

Biquad butter_highpass(double f0, double fs) {
  const double w0 = 2.0 * std::numbers::pi * f0 / fs;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double a0 = 1.0 + alpha;
  return {(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0, -2.0 * c / a0,
          (1.0 - alpha) / a0};
}

}  // namespace

RawTrace bandpass_filter(const RawTrace& trace, double low_hz, double high_hz) {
  const double fs = trace.sample_rate;
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0)) {
    throw ConfigError("band-pass needs 0 < low < high < fs/2, got " +
                      std::to_string(low_hz) + ".." + std::to_string(high_hz) + " Hz");
  }
  RawTrace out = trace;
  const std::size_t n = trace.samples.size();
  if (n < 2) return out;

  // Odd reflection at both ends absorbs the start-up transient.
  const std::size_t pad = std::min<std::size_t>(n - 1, static_cast<std::size_t>(fs));
  const auto& x = trace.samples;
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  const std::array<Biquad, 2> sections{butter_highpass(low_hz, fs),
                                       butter_lowpass(high_hz, fs)};
  for (const auto& s : sections) s.run(ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& s : sections) s.run(ext);
  std::reverse(ext.begin(), ext.end());

  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n), out.samples.begin());
  return out;
}

std::vector<std::size_t> detect_qrs(const RawTrace& trace, const QrsDetectorConfig& cfg) {
  const std::size_t n = trace.samples.size();
  const double fs = trace.sample_rate;
  if (n < 8) return {};

  const RawTrace bp = bandpass_filter(trace, cfg.band_low_hz, cfg.band_high_hz);
  const auto& f = bp.samples;

  // Five-point derivative, squared, then centered moving-window integration.
  std::vector<double> slope(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    slope[i] = (2.0 * f[i + 1] + f[i + 2] - f[i - 2] - 2.0 * f[i - 1]) / 8.0;
  }
  std::vector<double> sq(n);
  std::transform(slope.begin(), slope.end(), sq.begin(), [](double v) { return v * v; });
  const auto half = static_cast<std::size_t>(cfg.integration_window_s * fs / 2.0);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sq[i];
  std::vector<double> mwi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    mwi[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(2 * half + 1);
  }
  const double peak_energy = *std::max_element(mwi.begin(), mwi.end());
  if (!(peak_energy > 1e-10)) return {};

  // Candidate fiducials: local maxima of the integrated energy.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1]) candidates.push_back(i);
  }

  const auto refractory = static_cast<std::size_t>(cfg.refractory_s * fs);
  const auto t_window = static_cast<std::size_t>(cfg.t_wave_window_s * fs);
  const std::size_t learn = std::min(n, static_cast<std::size_t>(2.0 * fs));
  double spk = 0.25 * *std::max_element(mwi.begin(), mwi.begin() + learn);
  double npk = 0.5 * std::accumulate(mwi.begin(), mwi.begin() + learn, 0.0) /
               static_cast<double>(learn);
  auto threshold = [&] { return npk + 0.25 * (spk - npk); };

  auto max_slope = [&](std::size_t c) {
    const std::size_t lo = c >= half ? c - half : 0;
    const std::size_t hi = std::min(n, c + half + 1);
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(slope[i]));
    return m;
  };

  struct Beat {
    std::size_t at;
    double energy;
    double slope;
  };
  std::vector<Beat> beats;
  std::vector<std::size_t> rr_history;
  std::vector<Beat> skipped;  // sub-threshold candidates since the last beat

  auto accept = [&](const Beat& b) {
    if (!beats.empty()) {
      rr_history.push_back(b.at - beats.back().at);
      if (rr_history.size() > 8) rr_history.erase(rr_history.begin());
    }
    beats.push_back(b);
    spk = 0.125 * b.energy + 0.875 * spk;
    skipped.clear();
  };

  for (std::size_t c : candidates) {
    const Beat cand{c, mwi[c], max_slope(c)};

    // Search back for a missed beat once the gap exceeds 1.66 mean RR.
    if (!beats.empty() && !rr_history.empty() && !skipped.empty()) {
      const double mean_rr = std::accumulate(rr_history.begin(), rr_history.end(), 0.0) /
                             static_cast<double>(rr_history.size());
      if (static_cast<double>(c - beats.back().at) > 1.66 * mean_rr) {
        auto best = std::max_element(skipped.begin(), skipped.end(),
                                     [](const Beat& a, const Beat& b) {
                                       return a.energy < b.energy;
                                     });
        if (best->energy > 0.5 * threshold() && best->at - beats.back().at >= refractory) {
          const Beat found = *best;
          accept(found);
          spk = 0.25 * found.energy + 0.75 * spk;
        }
      }
    }

    if (cand.energy > threshold()) {
      if (!beats.empty() && c - beats.back().at < refractory) {
        if (cand.energy > beats.back().energy) beats.back() = cand;
        continue;
      }
      if (!beats.empty() && c - beats.back().at < t_window &&
          cand.slope < 0.5 * beats.back().slope) {
        npk = 0.125 * cand.energy + 0.875 * npk;
        continue;
      }
      accept(cand);
    } else {
      npk = 0.125 * cand.energy + 0.875 * npk;
      skipped.push_back(cand);
    }
  }

  // Place each fiducial on the largest filtered deflection nearby.
  std::vector<std::size_t> peaks;
  for (const Beat& b : beats) {
    const std::size_t lo = b.at >= half ? b.at - half : 0;
    const std::size_t hi = std::min(n, b.at + half + 1);
    std::size_t r = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (f[i] > f[r]) r = i;
    }
    if (!peaks.empty() && r < peaks.back() + refractory) {
      if (f[r] > f[peaks.back()]) peaks.back() = r;
      continue;
    }
    peaks.push_back(r);
  }
  return peaks;
}

std::vector<BeatSegment> segment_beats(const RawTrace& trace,
                                       const std::vector<std::size_t>& peaks) {
  std::vector<BeatSegment> out;
  const std::size_t n = trace.samples.size();
  for (std::size_t r : peaks) {
    if (r < kWindowPre || r > n || n - r < kWindowPost) continue;
    BeatSegment seg;
    seg.r_index = kWindowPre;
    const auto first = trace.samples.begin() + static_cast<std::ptrdiff_t>(r - kWindowPre);
    seg.values.assign(first, first + static_cast<std::ptrdiff_t>(kWindow));
    out.push_back(std::move(seg));
  }
  return out;
}

void normalize_in_place(std::vector<double>& values) {
  if (values.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi - lo;
  if (!(span > 0.0)) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  // (x - (max + min) / 2) / span, arranged so the extremes land on +-0.5 exactly.
  for (double& v : values) v = (v - lo) / span - 0.5;
}

BeatSegment normalize_beat(BeatSegment segment) {
  normalize_in_place(segment.values);
  return segment;
}

}  // namespace negres::signal
