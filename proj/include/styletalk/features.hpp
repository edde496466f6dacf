#pragma once

// Frame-based DSP features: autocorrelation pitch tracking, RMS energy,
// harmonics-to-noise ratio, syllable rate, and the toy style encoder and
// speaker embedding built on top of them.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"

namespace styletalk {

enum class WindowKind { rectangular, hann };

struct FrameSpec {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  WindowKind window = WindowKind::hann;

  void validate() const {
    if (!(hop_ms > 0.0) || !(hop_ms <= frame_ms))
      throw ArgumentError("FrameSpec: require 0 < hop_ms <= frame_ms");
  }
  std::size_t frame_length(int sample_rate) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frame_ms * sample_rate / 1000.0)));
  }
  std::size_t hop_length(int sample_rate) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0)));
  }
};

// Voicing decision parameters.
struct VoicingParams {
  double f_min = 50.0;
  double f_max = 500.0;
  double threshold = 0.30;       // normalized autocorrelation peak
  double silence_floor = 1e-4;   // frame RMS
  double octave_ratio = 0.80;    // earliest peak within this fraction of the best wins
};

struct PitchFrame {
  double f0 = 0.0;      // Hz, 0 when unvoiced
  bool voiced = false;
  double peak = 0.0;    // refined normalized autocorrelation at the chosen lag
  double rms = 0.0;
};

struct AcousticSummary {
  double pitch_mean = 0.0;
  double pitch_std = 0.0;
  double energy_mean = 0.0;
  double energy_std = 0.0;
  double hnr_db = -20.0;
  double duration_s = 0.0;
  double voiced_fraction = 0.0;

  friend bool operator==(const AcousticSummary&, const AcousticSummary&) = default;
};

inline constexpr double kHnrFloorDb = -20.0;
inline constexpr double kHnrCeilDb = 40.0;
inline constexpr std::size_t kEmbeddingBands = 16;

namespace detail {

inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::hann && n > 1) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

// Analysis grid. Clips shorter than one frame but non-empty are analysed
// as a single frame spanning the whole clip.
struct FrameGrid {
  std::size_t length = 0;
  std::size_t hop = 0;
  std::size_t count = 0;
  std::vector<double> window;

  std::size_t start(std::size_t i) const { return i * hop; }
};

inline FrameGrid frame_grid(const AudioClip& clip, const FrameSpec& spec) {
  spec.validate();
  FrameGrid g;
  g.length = spec.frame_length(clip.sample_rate());
  g.hop = spec.hop_length(clip.sample_rate());
  const std::size_t n = clip.size();
  if (n == 0) return g;
  if (n < g.length) {
    g.length = n;
    g.count = 1;
  } else {
    g.count = 1 + (n - g.length) / g.hop;
  }
  g.window = make_window(spec.window, g.length);
  return g;
}

inline double frame_rms(std::span<const double> x, std::size_t start, const FrameGrid& g) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < g.length; ++n) {
    const double w = g.window[n];
    num += w * w * x[start + n] * x[start + n];
    den += w * w;
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

inline std::vector<double> frame_rms_contour(const AudioClip& clip, const FrameSpec& spec) {
  const FrameGrid g = frame_grid(clip, spec);
  std::vector<double> out(g.count);
  for (std::size_t i = 0; i < g.count; ++i) out[i] = frame_rms(clip.samples(), g.start(i), g);
  return out;
}

inline void mean_std(std::span<const double> v, double& mean, double& stdev) {
  mean = 0.0;
  stdev = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  stdev = std::sqrt(acc / static_cast<double>(v.size()));
}

// Owns an FFTW real-to-complex plan. Plan creation is serialized because the
// FFTW planner is not thread-safe.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n_);
    out_ = fftw_alloc_complex(n_ / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), in_, out_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  std::size_t size() const { return n_; }

  // Power spectrum |X_k|^2 for k in [0, n/2] of the zero-padded input.
  std::vector<double> power(std::span<const double> frame) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy_n(frame.begin(), std::min(frame.size(), n_), in_);
    fftw_execute(plan_);
    std::vector<double> p(n_ / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    return p;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_{};
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace detail

// Normalized cross-correlation pitch tracker. For every analysis frame the
// window-weighted correlation between the frame and its lagged copy is
// maximized over the lag band [sr/f_max, sr/f_min]; the lagged copy is taken
// ahead of the frame, or behind it near the end of the clip.
inline std::vector<PitchFrame> pitch_track(const AudioClip& clip, const FrameSpec& spec = {},
                                           const VoicingParams& vp = {}) {
  spec.validate();
  const double sr = clip.sample_rate();
  if (!(vp.f_min > 0.0) || !(vp.f_min < vp.f_max) || vp.f_max > sr / 2.0)
    throw ArgumentError("pitch_track: require 0 < f_min < f_max <= sample_rate/2");
  const std::size_t N = spec.frame_length(clip.sample_rate());
  if (clip.size() < N) return {};

  const detail::FrameGrid g = detail::frame_grid(clip, spec);
  const auto x = clip.samples();
  const std::size_t len = x.size();
  const std::size_t lag_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sr / vp.f_max)));
  const std::size_t lag_max = static_cast<std::size_t>(std::ceil(sr / vp.f_min));

  std::vector<double> w2(N);
  for (std::size_t n = 0; n < N; ++n) w2[n] = g.window[n] * g.window[n];

  std::vector<PitchFrame> frames(g.count);
  std::vector<double> r;
  for (std::size_t i = 0; i < g.count; ++i) {
    const std::size_t s = g.start(i);
    PitchFrame& pf = frames[i];
    pf.rms = detail::frame_rms(x, s, g);

    // Direction of the lagged copy and the lags it admits.
    bool forward = true;
    std::size_t hi = lag_max + 1;
    if (s + N + hi > len) {
      if (s >= hi) {
        forward = false;
      } else {
        hi = std::max(len - s - N, s);
        forward = (len - s - N) >= s;
      }
    }
    if (hi < lag_min + 1) continue;
    const std::size_t lo = lag_min - 1;

    double e0 = 0.0;
    for (std::size_t n = 0; n < N; ++n) e0 += w2[n] * x[s + n] * x[s + n];
    if (e0 <= 0.0) continue;

    r.assign(hi + 1, 0.0);
    for (std::size_t tau = lo; tau <= hi; ++tau) {
      double num = 0.0, et = 0.0;
      if (forward) {
        const double* a = &x[s];
        const double* b = &x[s + tau];
        for (std::size_t n = 0; n < N; ++n) {
          num += w2[n] * a[n] * b[n];
          et += w2[n] * b[n] * b[n];
        }
      } else {
        const double* a = &x[s];
        const double* b = &x[s - tau];
        for (std::size_t n = 0; n < N; ++n) {
          num += w2[n] * a[n] * b[n];
          et += w2[n] * b[n] * b[n];
        }
      }
      r[tau] = et > 0.0 ? num / std::sqrt(e0 * et) : 0.0;
    }

    // Refined interior local maxima.
    struct Cand {
      double lag, value;
    };
    std::vector<Cand> cands;
    double best = -1.0;
    const std::size_t top = std::min(hi - 1, lag_max);
    for (std::size_t tau = lag_min; tau <= top; ++tau) {
      if (!(r[tau] >= r[tau - 1] && r[tau] > r[tau + 1])) continue;
      const double a = r[tau - 1], b = r[tau], c = r[tau + 1];
      const double den = a - 2.0 * b + c;
      double delta = 0.0, value = b;
      if (den < 0.0) {
        delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
        value = b - 0.25 * (a - c) * delta;
      }
      cands.push_back({static_cast<double>(tau) + delta, value});
      best = std::max(best, value);
    }
    if (cands.empty()) continue;
    const Cand* chosen = nullptr;
    for (const Cand& c : cands) {
      if (c.value >= vp.octave_ratio * best) {
        chosen = &c;
        break;
      }
    }
    pf.peak = chosen->value;
    pf.voiced = chosen->value > vp.threshold && pf.rms > vp.silence_floor;
    pf.f0 = pf.voiced ? sr / chosen->lag : 0.0;
  }
  return frames;
}

struct EnergyStats {
  double mean = 0.0;
  double std = 0.0;
};

// Per-frame RMS (window-energy normalized) with population statistics.
inline EnergyStats energy_stats(const AudioClip& clip, const FrameSpec& spec = {}) {
  const std::vector<double> rms = detail::frame_rms_contour(clip, spec);
  EnergyStats e;
  detail::mean_std(rms, e.mean, e.std);
  return e;
}

inline double hnr_from_track(std::span<const PitchFrame> track) {
  double acc = 0.0;
  std::size_t voiced = 0;
  for (const PitchFrame& f : track) {
    if (!f.voiced) continue;
    const double r = std::clamp(f.peak, 1e-12, 1.0 - 1e-12);
    acc += 10.0 * std::log10(r / (1.0 - r));
    ++voiced;
  }
  if (voiced == 0) return kHnrFloorDb;
  return std::clamp(acc / static_cast<double>(voiced), kHnrFloorDb, kHnrCeilDb);
}

inline double hnr(const AudioClip& clip, const FrameSpec& spec = {}, const VoicingParams& vp = {}) {
  if (clip.empty()) return kHnrFloorDb;
  return hnr_from_track(pitch_track(clip, spec, vp));
}

// Syllable-proxy events: hysteresis crossings of the smoothed frame-RMS
// contour (rise above 35% of its maximum after falling below 15%).
inline std::size_t syllable_events(const AudioClip& clip, const FrameSpec& spec = {},
                                   double silence_floor = 1e-4) {
  const std::vector<double> rms = detail::frame_rms_contour(clip, spec);
  if (rms.empty()) return 0;
  std::vector<double> smooth(rms.size());
  for (std::size_t i = 0; i < rms.size(); ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(rms.size() - 1, i + 1);
    double acc = 0.0;
    for (std::size_t j = a; j <= b; ++j) acc += rms[j];
    smooth[i] = acc / static_cast<double>(b - a + 1);
  }
  const double peak = *std::max_element(smooth.begin(), smooth.end());
  if (peak <= silence_floor) return 0;
  std::size_t events = 0;
  bool armed = true;
  for (double v : smooth) {
    if (armed && v >= 0.35 * peak) {
      ++events;
      armed = false;
    } else if (!armed && v <= 0.15 * peak) {
      armed = true;
    }
  }
  return events;
}

inline AcousticSummary summarize(const AudioClip& clip) {
  AcousticSummary s;
  if (clip.empty()) {
    s.hnr_db = 0.0;
    return s;
  }
  const FrameSpec spec;
  const std::vector<PitchFrame> track = pitch_track(clip, spec);
  std::vector<double> f0;
  for (const PitchFrame& f : track)
    if (f.voiced) f0.push_back(f.f0);
  detail::mean_std(f0, s.pitch_mean, s.pitch_std);
  const EnergyStats e = energy_stats(clip, spec);
  s.energy_mean = e.mean;
  s.energy_std = e.std;
  s.hnr_db = hnr_from_track(track);
  s.duration_s = clip.duration_seconds();
  s.voiced_fraction = track.empty() ? 0.0 : static_cast<double>(f0.size()) / static_cast<double>(track.size());
  return s;
}

// Normalization constants of the prosodic style vector.
namespace style_scale {
inline constexpr double pitch_mean_hz = 500.0;
inline constexpr double pitch_std_hz = 100.0;
inline constexpr double hnr_span_db = 60.0;
inline constexpr double max_rate = 20.0;
inline constexpr double max_duration_s = 60.0;
}  // namespace style_scale

inline double speaking_rate(const AudioClip& clip) {
  const double dur = clip.duration_seconds();
  if (dur <= 0.0) return 0.0;
  return std::min(style_scale::max_rate, static_cast<double>(syllable_events(clip)) / dur);
}

// Prosodic style: [pitch_mean/500, pitch_std/100, energy_mean, energy_std,
// (hnr+20)/60, rate/20, log(1+duration)/log(61), voiced_fraction].
inline StyleVector encode_style(const AudioClip& clip) {
  if (clip.empty()) throw ArgumentError("encode_style: empty clip");
  using namespace style_scale;
  const AcousticSummary s = summarize(clip);
  const double dur = std::min(s.duration_s, max_duration_s);
  return StyleVector({s.pitch_mean / pitch_mean_hz, s.pitch_std / pitch_std_hz, s.energy_mean,
                      s.energy_std, (s.hnr_db - kHnrFloorDb) / hnr_span_db, speaking_rate(clip) / max_rate,
                      std::log1p(dur) / std::log1p(max_duration_s), s.voiced_fraction},
                     StyleKind::prosodic);
}

// Band-energy ratios over 16 mel-spaced triangular bands, L2-normalized.
// A clip with no spectral energy maps to the uniform unit vector.
inline std::vector<double> acoustic_embedding(const AudioClip& clip) {
  if (clip.empty()) throw ArgumentError("acoustic_embedding: empty clip");
  const FrameSpec spec;
  const detail::FrameGrid g = detail::frame_grid(clip, spec);
  detail::RealFft fft(detail::next_pow2(g.length));
  const std::size_t bins = fft.size() / 2 + 1;
  const double sr = clip.sample_rate();

  // Triangular filters between mel(0) and mel(sr/2).
  const double mel_hi = detail::hz_to_mel(sr / 2.0);
  std::vector<double> edges(kEmbeddingBands + 2);
  for (std::size_t b = 0; b < edges.size(); ++b)
    edges[b] = detail::mel_to_hz(mel_hi * static_cast<double>(b) / static_cast<double>(kEmbeddingBands + 1));

  std::vector<double> spectrum(bins, 0.0);
  std::vector<double> frame(g.length);
  const auto x = clip.samples();
  for (std::size_t i = 0; i < g.count; ++i) {
    const std::size_t s = g.start(i);
    for (std::size_t n = 0; n < g.length; ++n) frame[n] = g.window[n] * x[s + n];
    const std::vector<double> p = fft.power(frame);
    for (std::size_t k = 0; k < bins; ++k) spectrum[k] += p[k];
  }

  std::vector<double> band(kEmbeddingBands, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double hz = sr * static_cast<double>(k) / static_cast<double>(fft.size());
    for (std::size_t b = 0; b < kEmbeddingBands; ++b) {
      const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
      double weight = 0.0;
      if (hz > lo && hz <= mid) weight = (hz - lo) / (mid - lo);
      else if (hz > mid && hz < hi) weight = (hi - hz) / (hi - mid);
      band[b] += weight * spectrum[k];
    }
  }
  double total = 0.0;
  for (double v : band) total += v;
  if (total <= 0.0) return std::vector<double>(kEmbeddingBands, 1.0 / std::sqrt(double(kEmbeddingBands)));
  double norm = 0.0;
  for (double& v : band) {
    v /= total;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : band) v /= norm;
  return band;
}

// Default timbre used when no harmonic structure can be measured: 1/k.
inline StyleVector default_acoustic_style() {
  std::vector<double> v(kStyleDim);
  for (std::size_t k = 0; k < kStyleDim; ++k) v[k] = 1.0 / static_cast<double>(k + 1);
  return StyleVector(std::move(v), StyleKind::acoustic);
}

// Relative amplitudes of harmonics 1..8 averaged over voiced frames,
// normalized so the strongest harmonic is 1.
inline StyleVector estimate_acoustic_style(const AudioClip& clip) {
  if (clip.empty()) throw ArgumentError("estimate_acoustic_style: empty clip");
  const FrameSpec spec;
  const std::vector<PitchFrame> track = pitch_track(clip, spec);
  const detail::FrameGrid g = detail::frame_grid(clip, spec);
  detail::RealFft fft(detail::next_pow2(4 * g.length));
  const double sr = clip.sample_rate();
  const auto x = clip.samples();
  std::vector<double> acc(kStyleDim, 0.0);
  std::vector<double> frame(g.length);
  std::size_t used = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!track[i].voiced) continue;
    const std::size_t s = g.start(i);
    for (std::size_t n = 0; n < g.length; ++n) frame[n] = g.window[n] * x[s + n];
    const std::vector<double> p = fft.power(frame);
    for (std::size_t h = 0; h < kStyleDim; ++h) {
      const double bin = track[i].f0 * static_cast<double>(h + 1) * static_cast<double>(fft.size()) / sr;
      const auto c = static_cast<std::ptrdiff_t>(std::lround(bin));
      double m = 0.0;
      for (std::ptrdiff_t k = c - 2; k <= c + 2; ++k)
        if (k >= 0 && k < static_cast<std::ptrdiff_t>(p.size())) m = std::max(m, p[static_cast<std::size_t>(k)]);
      acc[h] += std::sqrt(m);
    }
    ++used;
  }
  const double top = *std::max_element(acc.begin(), acc.end());
  if (used == 0 || top <= 0.0) return default_acoustic_style();
  for (double& v : acc) v /= top;
  return StyleVector(std::move(acc), StyleKind::acoustic);
}

}  // namespace styletalk
