#pragma once

// Discrete-event timing of one dialog turn under the three pipeline
// topologies, stall-free playback delay, and silence-based turn-end
// detection.
//
// Time origin is the end of the user's turn. Critical-lane stages run back
// to back; the final stage may stream audio. In the style-talker topology
// recognition and style extraction of the incoming audio run on the
// background lane once playback starts, and any part of that work still
// running when playback ends is carried over into the next turn.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "styletalk/components.hpp"
#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"
#include "styletalk/features.hpp"

namespace styletalk {

enum class Topology { cascade, style_talker, e2e_speech };

inline const char* to_string(Topology t) {
  switch (t) {
    case Topology::cascade: return "cascade";
    case Topology::style_talker: return "style-talker";
    case Topology::e2e_speech: return "e2e";
  }
  return "cascade";
}

inline Topology parse_topology(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "cascade") return Topology::cascade;
  if (s == "style-talker") return Topology::style_talker;
  if (s == "e2e" || s == "e2e-speech") return Topology::e2e_speech;
  throw ArgumentError("unknown topology '" + s + "'");
}

namespace stage {
inline constexpr const char* asr = "asr";
inline constexpr const char* llm = "llm";
inline constexpr const char* audio_llm = "audio_llm";
inline constexpr const char* tts = "tts";
inline constexpr const char* style_encoder = "style_encoder";
inline constexpr const char* e2e = "e2e";
}  // namespace stage

struct TopologyStages {
  std::vector<std::string> critical;    // in order; the last one produces audio
  std::vector<std::string> background;  // run from playback start
};

inline TopologyStages stages_of(Topology t) {
  switch (t) {
    case Topology::cascade: return {{stage::asr, stage::llm, stage::tts}, {}};
    case Topology::style_talker: return {{stage::audio_llm, stage::tts}, {stage::asr, stage::style_encoder}};
    case Topology::e2e_speech: return {{stage::e2e}, {}};
  }
  return {};
}

using LatencyMap = std::map<std::string, LatencyModel>;

enum class Lane { critical, background };

inline const char* to_string(Lane l) { return l == Lane::critical ? "critical" : "background"; }

struct StageEvent {
  std::string stage;
  double start_s = 0.0;
  double end_s = 0.0;
  std::size_t turn_index = 0;
  Lane lane = Lane::critical;

  friend bool operator==(const StageEvent&, const StageEvent&) = default;
};

struct SimReport {
  double rtf = 0.0;
  double delay_s = 0.0;
  double generation_s = 0.0;  // sum of critical-lane latencies
  double playback_start_s = 0.0;
  double playback_end_s = 0.0;
  double carryover_s = 0.0;
  std::vector<StageEvent> timeline;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

struct SimOptions {
  // Output token count used for the e2e stage: speech units per output second.
  double units_per_output_second = 50.0;
  std::size_t turn_index = 0;
};

// Audio seconds produced as a function of wall-clock time, given by
// breakpoints (wall_s, produced_s) with both coordinates non-decreasing;
// linear between breakpoints, zero before the first one.
struct ProductionCurve {
  std::vector<std::pair<double, double>> points;

  static ProductionCurve instantaneous(double at_s, double out_dur_s) {
    return {{{at_s, 0.0}, {at_s, out_dur_s}}};
  }
  // First audio at first_chunk_s, then seconds_per_audio_second wall time per
  // produced second (0 means the rest arrives at once).
  static ProductionCurve streaming(double first_chunk_s, double seconds_per_audio_second, double out_dur_s) {
    return {{{first_chunk_s, 0.0}, {first_chunk_s + seconds_per_audio_second * out_dur_s, out_dur_s}}};
  }

  double produced_at(double wall_s) const {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto [w, a] = points[i];
      if (wall_s >= w) best = std::max(best, a);
      if (i + 1 < points.size()) {
        const auto [w1, a1] = points[i + 1];
        if (wall_s >= w && wall_s < w1 && w1 > w) best = std::max(best, a + (a1 - a) * (wall_s - w) / (w1 - w));
      }
    }
    return best;
  }
};

// Earliest playback start d >= (first breakpoint) such that
// produced(d + t) >= t for every t in [0, out_dur].
inline double stall_free_delay(const ProductionCurve& production, double out_dur_s) {
  const auto& p = production.points;
  if (p.empty()) throw ArgumentError("stall_free_delay: empty production curve");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i].first < p[i - 1].first || p[i].second < p[i - 1].second)
      throw ArgumentError("stall_free_delay: production curve must be non-decreasing");
  if (p.back().second < out_dur_s)
    throw ArgumentError("stall_free_delay: production never reaches the output duration");

  // Playback needs audio amount a at time d + a; the binding constraints sit
  // at the ends of each rising segment (clipped at out_dur).
  double d = p.front().first;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const auto [w0, a0] = p[i];
    const auto [w1, a1] = p[i + 1];
    if (!(a1 > a0) || a0 >= out_dur_s) continue;
    d = std::max(d, w0 - a0);
    if (a1 <= out_dur_s) {
      d = std::max(d, w1 - a1);
    } else {
      const double w_end = w0 + (w1 - w0) * (out_dur_s - a0) / (a1 - a0);
      d = std::max(d, w_end - out_dur_s);
    }
  }
  return d;
}

inline const LatencyModel& require_stage(const LatencyMap& latencies, const std::string& name, Topology t) {
  const auto it = latencies.find(name);
  if (it == latencies.end())
    throw ConfigError(std::string("topology ") + to_string(t) + " requires a latency model for stage '" + name + "'");
  it->second.validate();
  return it->second;
}

inline SimReport simulate_turn(Topology topology, double input_dur_s, double out_tokens, double out_dur_s,
                               const LatencyMap& latencies, double prev_carryover_s = 0.0,
                               const SimOptions& options = {}) {
  if (input_dur_s < 0.0 || out_tokens < 0.0 || out_dur_s < 0.0 || prev_carryover_s < 0.0)
    throw ArgumentError("simulate_turn: durations, token counts and carryover must be >= 0");
  if (!(out_dur_s > 0.0)) throw ArgumentError("simulate_turn: RTF undefined for zero output duration");

  const TopologyStages stages = stages_of(topology);
  const double tokens = topology == Topology::e2e_speech ? options.units_per_output_second * out_dur_s : out_tokens;

  SimReport report;
  double t = prev_carryover_s;
  std::optional<ProductionCurve> production;
  for (std::size_t i = 0; i < stages.critical.size(); ++i) {
    const std::string& name = stages.critical[i];
    const LatencyModel& m = require_stage(latencies, name, topology);
    const double cost = m.evaluate(input_dur_s, tokens, out_dur_s);
    report.timeline.push_back({name, t, t + cost, options.turn_index, Lane::critical});
    if (i + 1 == stages.critical.size()) {
      production = m.streaming
                       ? ProductionCurve::streaming(t + m.first_chunk(input_dur_s, tokens, out_dur_s),
                                                    m.per_output_audio_s, out_dur_s)
                       : ProductionCurve::instantaneous(t + cost, out_dur_s);
    }
    report.generation_s += cost;
    t += cost;
  }
  report.rtf = report.generation_s / out_dur_s;
  report.delay_s = stall_free_delay(*production, out_dur_s);
  report.playback_start_s = report.delay_s;
  report.playback_end_s = report.delay_s + out_dur_s;

  double bg = report.playback_start_s;
  for (const std::string& name : stages.background) {
    const LatencyModel& m = require_stage(latencies, name, topology);
    const double cost = m.evaluate(input_dur_s, 0.0, 0.0);
    report.timeline.push_back({name, bg, bg + cost, options.turn_index, Lane::background});
    bg += cost;
  }
  report.carryover_s = std::max(0.0, bg - report.playback_end_s);
  return report;
}

// First sample index s such that every frame covering [s, s + min_silence]
// has RMS below the floor; resolution is one hop.
inline std::optional<std::size_t> detect_turn_end(const AudioClip& clip, double silence_floor_rms = 1e-3,
                                                  double min_silence_ms = 700.0, const FrameSpec& spec = {}) {
  if (!(min_silence_ms > 0.0)) throw ArgumentError("detect_turn_end: min_silence_ms must be positive");
  const std::vector<double> rms = detail::frame_rms_contour(clip, spec);
  const detail::FrameGrid g = detail::frame_grid(clip, spec);
  const auto need = static_cast<std::size_t>(std::ceil(min_silence_ms * clip.sample_rate() / 1000.0));
  std::optional<std::size_t> run_start;
  for (std::size_t i = 0; i < rms.size(); ++i) {
    if (rms[i] >= silence_floor_rms) {
      run_start.reset();
      continue;
    }
    if (!run_start) run_start = g.start(i);
    const std::size_t run_end = g.start(i) + g.length;
    if (run_end - *run_start >= need) return run_start;
  }
  return std::nullopt;
}

}  // namespace styletalk
