#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "negres/labels.hpp"
#include "negres/rng.hpp"

namespace negres::signal {

inline constexpr double kSampleRate = 250.0;

/// Segment geometry around an R peak: [r - kWindowPre, r + kWindowPost).
inline constexpr std::size_t kWindowPre = 100;
inline constexpr std::size_t kWindowPost = 150;
inline constexpr std::size_t kWindow = kWindowPre + kWindowPost;

/// Single-lead trace in millivolts.
struct RawTrace {
  std::vector<double> samples;
  double sample_rate = kSampleRate;
  std::string patient_id;
};

struct BeatSegment {
  std::vector<double> values;
  /// Position of the R peak inside `values`.
  std::size_t r_index = 0;
};

/// Zero-phase band-pass: 2nd-order Butterworth high-pass at `low_hz` cascaded
/// with a 2nd-order Butterworth low-pass at `high_hz`, run forward and
/// backward. Throws ConfigError unless 0 < low < high < fs / 2.
RawTrace bandpass_filter(const RawTrace& trace, double low_hz, double high_hz);

struct QrsDetectorConfig {
  double band_low_hz = 5.0;
  double band_high_hz = 15.0;
  double integration_window_s = 0.150;
  double refractory_s = 0.200;
  /// Candidates this close to the previous beat must pass the slope test.
  double t_wave_window_s = 0.360;
};

/// R-peak sample indices, strictly increasing and at least one refractory
/// period apart. Empty for a flat trace.
std::vector<std::size_t> detect_qrs(const RawTrace& trace,
                                    const QrsDetectorConfig& config = {});

/// One kWindow-long segment per peak whose window lies inside the trace, in
/// peak order. Peaks too close to either edge are dropped.
std::vector<BeatSegment> segment_beats(const RawTrace& trace,
                                       const std::vector<std::size_t>& peaks);

/// Maps the segment to [-0.5, 0.5] by centering on the mid-range and
/// dividing by the range. A constant segment becomes all zeros.
BeatSegment normalize_beat(BeatSegment segment);
void normalize_in_place(std::vector<double>& values);

/// Generator settings. Defaults sit inside the normal-ECG reference ranges:
/// PR 0.12-0.20 s, P duration under 0.12 s, QRS 0.06-0.11 s, RR 0.60-1.00 s,
/// R amplitude over 0.5 mV, QT 0.33-0.43 s, T amplitude over 0.5 mV, P
/// amplitude under 0.25 mV.
struct SynthConfig {
  double heart_rate_min_bpm = 60.0;
  double heart_rate_max_bpm = 100.0;
  /// Beat-to-beat RR variation (fraction of the nominal RR) for regular rhythms.
  double rr_jitter = 0.02;

  double p_amplitude_mv = 0.15;
  double p_duration_s = 0.09;
  double pr_interval_min_s = 0.14;
  double pr_interval_max_s = 0.18;
  double qrs_duration_min_s = 0.07;
  double qrs_duration_max_s = 0.10;
  double r_amplitude_min_mv = 1.0;
  double r_amplitude_max_mv = 1.5;
  double qt_interval_min_s = 0.35;
  double qt_interval_max_s = 0.41;
  double t_amplitude_mv = 0.55;
  double t_duration_s = 0.16;

  double baseline_wander_mv = 0.05;
  double baseline_wander_hz = 0.3;
  /// 50 Hz mains interference amplitude for all beat types.
  double emi_mv = 0.0;
  /// Expected low-frequency motion bursts per second for all beat types.
  double motion_burst_rate_hz = 0.0;
  double motion_burst_mv = 1.5;
  double white_noise_mv = 0.01;

  std::uint64_t seed = 0;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Per-patient variant: heart-rate band, amplitudes, timing and noise levels
/// drawn around `base` while staying inside the reference ranges.
SynthConfig patient_variant(const SynthConfig& base, Rng& rng);

struct SynthTrace {
  RawTrace trace;
  std::vector<std::size_t> r_peaks;
  std::vector<Label> labels;
  std::vector<double> qrs_durations_s;
  /// Interval preceding each beat; the first beat gets the nominal RR.
  std::vector<double> rr_intervals_s;
};

/// Sum-of-Gaussians trace with `n_beats` beats of one morphology:
///   N  reference morphology
///   V  QRS wider than 0.11 s, no P wave, discordant T, premature + pause
///   S  premature beat with an abnormal P wave
///   A  irregular RR, P replaced by fibrillatory ripple
///   E  dominant 50 Hz interference on a normal beat
///   Q  large low-frequency motion bursts on a normal beat
/// Deterministic in `config.seed`. Throws ConfigError for n_beats == 0.
SynthTrace synth_ecg(const SynthConfig& config, std::size_t n_beats, Label beat_type);

/// Raw trace files: CSV (`patient_id,sample_rate` header, a value row, then
/// one sample per line) or binary (u64 little-endian count, then float64 LE
/// samples). Format is chosen by extension: `.csv` or anything else.
RawTrace read_trace(const std::filesystem::path& path);
void write_trace_csv(const RawTrace& trace, const std::filesystem::path& path);
void write_trace_binary(const RawTrace& trace, const std::filesystem::path& path);

}  // namespace negres::signal
