#pragma once

// Pluggable pipeline components and their deterministic toy implementations:
// a corpus-lookup recognizer, a style responder (oracle or bigram text with
// several style policies), a harmonic synthesizer and a DSP style encoder.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"
#include "styletalk/features.hpp"

namespace styletalk {

// Affine latency in the sizes of a stage's inputs and outputs.
// Streaming stages emit audio progressively: everything except the
// per-output-audio term is paid before the first chunk.
struct LatencyModel {
  double fixed_s = 0.0;
  double per_input_audio_s = 0.0;
  double per_output_token_s = 0.0;
  double per_output_audio_s = 0.0;
  bool streaming = false;

  void validate() const {
    if (fixed_s < 0.0 || per_input_audio_s < 0.0 || per_output_token_s < 0.0 || per_output_audio_s < 0.0 ||
        !std::isfinite(fixed_s + per_input_audio_s + per_output_token_s + per_output_audio_s))
      throw ConfigError("LatencyModel: all terms must be finite and >= 0");
  }
  double evaluate(double input_dur_s, double out_tokens, double out_dur_s) const {
    return fixed_s + per_input_audio_s * input_dur_s + per_output_token_s * out_tokens +
           per_output_audio_s * out_dur_s;
  }
  // Time until the first audio is available (whole stage when not streaming).
  double first_chunk(double input_dur_s, double out_tokens, double out_dur_s) const {
    if (!streaming) return evaluate(input_dur_s, out_tokens, out_dur_s);
    return fixed_s + per_input_audio_s * input_dur_s + per_output_token_s * out_tokens;
  }

  friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

// FNV-1a, used to derive per-item seeds.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::span<const double> values, std::uint64_t h) {
  for (double v : values) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &v, sizeof b);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(b), sizeof b), h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Interfaces

struct RecognitionResult {
  std::string text;
  double latency_s = 0.0;
};

struct ResponderOutput {
  std::string text;
  StyleVector prosodic_style;
  double latency_s = 0.0;
};

class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual RecognitionResult recognize(const AudioClip& clip) const = 0;
};

class StyleEncoder {
 public:
  virtual ~StyleEncoder() = default;
  virtual StyleVector encode(const AudioClip& clip) const = 0;
  virtual double latency(const AudioClip& clip) const = 0;
};

class StyleResponder {
 public:
  virtual ~StyleResponder() = default;
  virtual ResponderOutput respond(const AudioClip& incoming, const ConversationContext& context,
                                  const SpeakerId& response_speaker, std::uint64_t rng_seed) const = 0;
};

class Synthesizer {
 public:
  virtual ~Synthesizer() = default;
  virtual AudioClip synthesize(const std::string& text, const StyleVector& prosodic,
                               const StyleVector& acoustic) const = 0;
  virtual double latency(const std::string& text, const AudioClip& output) const = 0;
};

// ---------------------------------------------------------------------------
// Toy recognizer

// Returns the corpus transcript of a clip with ceil(target_wer * W) words
// substituted; substitutions only, so the resulting WER is exact.
class CorpusRecognizer final : public Recognizer {
 public:
  CorpusRecognizer(std::map<std::string, std::string> transcripts, double target_wer, std::uint64_t seed,
                   LatencyModel latency = {})
      : transcripts_(std::move(transcripts)), target_wer_(target_wer), seed_(seed), latency_(latency) {
    if (!(target_wer >= 0.0 && target_wer <= 1.0)) throw ArgumentError("CorpusRecognizer: target_wer outside [0, 1]");
    latency_.validate();
  }

  RecognitionResult recognize(const AudioClip& clip) const override {
    if (!clip.source_id()) throw LookupError("recognize: clip has no source id");
    const auto it = transcripts_.find(*clip.source_id());
    if (it == transcripts_.end()) throw LookupError("recognize: unknown source id '" + *clip.source_id() + "'");
    std::vector<std::string> words = split_words(it->second);
    const auto subs = static_cast<std::size_t>(std::ceil(target_wer_ * static_cast<double>(words.size()) - 1e-9));
    if (subs > 0) {
      std::mt19937_64 rng(fnv1a(*clip.source_id(), seed_ ^ 0x9e3779b97f4a7c15ULL));
      std::vector<std::size_t> pos(words.size());
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
      std::shuffle(pos.begin(), pos.end(), rng);
      for (std::size_t j = 0; j < subs; ++j) {
        std::string& w = words[pos[j]];
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, noise_words().size() - 1)(rng);
        if (noise_words()[pick] == w) pick = (pick + 1) % noise_words().size();
        w = noise_words()[pick];
      }
    }
    return {join_words(words), latency_.evaluate(clip.duration_seconds(), 0.0, 0.0)};
  }

  static const std::vector<std::string>& noise_words() {
    static const std::vector<std::string> w = {"zorbit", "quandle", "flimp", "gravel", "torsk",
                                               "plinth", "murble", "vexil", "crumpet", "dwindle"};
    return w;
  }

 private:
  std::map<std::string, std::string> transcripts_;
  double target_wer_;
  std::uint64_t seed_;
  LatencyModel latency_;
};

// ---------------------------------------------------------------------------
// Style encoder

class DspStyleEncoder final : public StyleEncoder {
 public:
  explicit DspStyleEncoder(LatencyModel latency = {}) : latency_(latency) { latency_.validate(); }
  StyleVector encode(const AudioClip& clip) const override { return encode_style(clip); }
  double latency(const AudioClip& clip) const override {
    return latency_.evaluate(clip.duration_seconds(), 0.0, 0.0);
  }

 private:
  LatencyModel latency_;
};

// ---------------------------------------------------------------------------
// Bigram text model

inline constexpr std::string_view kStartToken = "<s>";
inline constexpr std::string_view kEndToken = "</s>";

// Add-one smoothed bigram model over whitespace tokens. The outcome set is
// every corpus word plus the end marker; V is its size.
class BigramTable {
 public:
  void add_sentence(const std::vector<std::string>& words) {
    std::string prev(kStartToken);
    for (const std::string& w : words) {
      outcomes_.insert(w);
      ++counts_[prev][w];
      ++totals_[prev];
      prev = w;
    }
    outcomes_.insert(std::string(kEndToken));
    ++counts_[prev][std::string(kEndToken)];
    ++totals_[prev];
  }

  std::size_t vocab_size() const { return outcomes_.size(); }
  const std::set<std::string>& outcomes() const { return outcomes_; }

  double probability(const std::string& prev, const std::string& next) const {
    if (!outcomes_.contains(next)) return 0.0;
    const double v = static_cast<double>(outcomes_.size());
    double c = 0.0, total = 0.0;
    if (auto it = counts_.find(prev); it != counts_.end()) {
      if (auto jt = it->second.find(next); jt != it->second.end()) c = static_cast<double>(jt->second);
    }
    if (auto it = totals_.find(prev); it != totals_.end()) total = static_cast<double>(it->second);
    return (c + 1.0) / (total + v);
  }

  // Per-token perplexity of a sentence, end marker included.
  double log_prob(const std::vector<std::string>& words) const {
    double lp = 0.0;
    std::string prev(kStartToken);
    for (const std::string& w : words) {
      lp += std::log(probability(prev, w));
      prev = w;
    }
    return lp + std::log(probability(prev, std::string(kEndToken)));
  }

  std::string sample(std::uint64_t seed, std::size_t max_tokens = 60) const {
    if (outcomes_.empty()) throw StateError("BigramTable: empty table");
    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    std::vector<const std::string*> keys;
    for (const std::string& o : outcomes_) keys.push_back(&o);
    std::vector<double> weights(keys.size());
    std::string prev(kStartToken);
    while (out.size() < max_tokens) {
      for (std::size_t i = 0; i < keys.size(); ++i) weights[i] = probability(prev, *keys[i]);
      std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
      const std::string& next = *keys[dist(rng)];
      if (next == kEndToken) break;
      out.push_back(next);
      prev = next;
    }
    return join_words(out);
  }

  friend bool operator==(const BigramTable&, const BigramTable&) = default;

 private:
  std::map<std::string, std::map<std::string, std::size_t>> counts_;
  std::map<std::string, std::size_t> totals_;
  std::set<std::string> outcomes_;
};

// Trains on every turn of the training split; falls back to all
// conversations when no split is labelled train.
inline BigramTable train_markov(const std::vector<Conversation>& corpus) {
  BigramTable t;
  bool any_train = std::any_of(corpus.begin(), corpus.end(), [](const Conversation& c) { return c.split == Split::train; });
  std::size_t sentences = 0;
  for (const Conversation& c : corpus) {
    if (any_train && c.split != Split::train) continue;
    for (const Turn& turn : c.turns) {
      const auto words = split_words(turn.text);
      if (words.empty()) continue;
      t.add_sentence(words);
      ++sentences;
    }
  }
  if (sentences == 0) throw StateError("train_markov: empty training corpus");
  return t;
}

// ---------------------------------------------------------------------------
// Toy responder

enum class TextMode { oracle, markov };
enum class StyleMode { oracle, context_average, last_same_speaker };

struct OracleTarget {
  std::string text;
  StyleVector style;
};

inline StyleVector context_average_style(const ConversationContext& context, const SpeakerId& response_speaker) {
  if (context.entries.empty()) {
    const auto it = context.reference_styles.find(response_speaker);
    if (it == context.reference_styles.end())
      throw ConfigError("no reference style for response speaker '" + response_speaker + "'");
    return it->second.prosodic;
  }
  const std::size_t dim = context.entries.front().style.dim();
  std::vector<double> acc(dim, 0.0);
  for (const ContextEntry& e : context.entries) {
    if (e.style.dim() != dim) throw DimensionError("context styles differ in dimension");
    for (std::size_t i = 0; i < dim; ++i) acc[i] += e.style[i];
  }
  for (double& v : acc) v /= static_cast<double>(context.entries.size());
  return StyleVector(std::move(acc), StyleKind::prosodic);
}

// Oracle text/style is looked up by the incoming clip's source id.
class ToyResponder final : public StyleResponder {
 public:
  ToyResponder(TextMode text_mode, StyleMode style_mode, std::map<std::string, OracleTarget> oracle,
               std::optional<BigramTable> table = std::nullopt, LatencyModel latency = {})
      : text_mode_(text_mode),
        style_mode_(style_mode),
        oracle_(std::move(oracle)),
        table_(std::move(table)),
        latency_(latency) {
    latency_.validate();
  }

  ResponderOutput respond(const AudioClip& incoming, const ConversationContext& context,
                          const SpeakerId& response_speaker, std::uint64_t rng_seed) const override {
    ResponderOutput out;
    if (text_mode_ == TextMode::oracle) {
      out.text = target(incoming).text;
    } else {
      if (!table_) throw StateError("respond: markov mode requires a trained bigram table");
      out.text = table_->sample(rng_seed);
    }
    switch (style_mode_) {
      case StyleMode::oracle:
        out.prosodic_style = target(incoming).style;
        break;
      case StyleMode::context_average:
        out.prosodic_style = context_average_style(context, response_speaker);
        break;
      case StyleMode::last_same_speaker: {
        const auto it = std::find_if(context.entries.rbegin(), context.entries.rend(),
                                     [&](const ContextEntry& e) { return e.speaker == response_speaker; });
        out.prosodic_style =
            it != context.entries.rend() ? it->style : context_average_style(context, response_speaker);
        break;
      }
    }
    require_kind(out.prosodic_style, StyleKind::prosodic, "respond");
    out.latency_s = latency_.evaluate(incoming.duration_seconds(),
                                      static_cast<double>(split_words(out.text).size()), 0.0);
    return out;
  }

 private:
  const OracleTarget& target(const AudioClip& incoming) const {
    if (!incoming.source_id()) throw LookupError("respond: incoming clip has no source id");
    const auto it = oracle_.find(*incoming.source_id());
    if (it == oracle_.end()) throw LookupError("respond: no ground-truth target for '" + *incoming.source_id() + "'");
    return it->second;
  }

  TextMode text_mode_;
  StyleMode style_mode_;
  std::map<std::string, OracleTarget> oracle_;
  std::optional<BigramTable> table_;
  LatencyModel latency_;
};

// ---------------------------------------------------------------------------
// Toy synthesizer

inline constexpr int kSynthSampleRate = 16000;

// Physical style parameters the synthesizer reproduces, and the ranges over
// which encode_style recovers them.
struct ProsodyControls {
  double pitch_hz = 150.0;
  double pitch_std_hz = 10.0;
  double energy = 0.06;
  double hnr_db = 10.0;
  double rate = 4.0;  // syllables per second
};

namespace controllable {
inline constexpr double pitch_min_hz = 90.0, pitch_max_hz = 300.0;
inline constexpr double pitch_std_min_hz = 5.0, pitch_std_max_hz = 20.0;
inline constexpr double energy_min = 0.02, energy_max = 0.12;
inline constexpr double hnr_min_db = 0.0, hnr_max_db = 18.0;
inline constexpr double rate_min = 2.5, rate_max = 6.0;
// Style components encode_style recovers from synthesized speech. Pitch
// spread is driven too but drifts near the low end of the pitch range.
inline constexpr std::array<std::size_t, 4> components{0, 2, 4, 5};
}  // namespace controllable

// Components outside the controlled set are zero.
inline StyleVector make_prosodic_style(const ProsodyControls& c) {
  using namespace style_scale;
  std::vector<double> v(kStyleDim, 0.0);
  v[0] = c.pitch_hz / pitch_mean_hz;
  v[1] = c.pitch_std_hz / pitch_std_hz;
  v[2] = c.energy;
  v[4] = (c.hnr_db - kHnrFloorDb) / hnr_span_db;
  v[5] = c.rate / max_rate;
  return StyleVector(std::move(v), StyleKind::prosodic);
}

// One syllable per token at the decoded rate, a slowly wandering f0, harmonic
// weights taken from the acoustic style and additive noise at the decoded
// HNR. Output loudness is normalized to the decoded mean frame energy.
class HarmonicSynthesizer final : public Synthesizer {
 public:
  explicit HarmonicSynthesizer(LatencyModel latency = {}) : latency_(latency) { latency_.validate(); }

  static constexpr double kMinRate = 2.0;

  AudioClip synthesize(const std::string& text, const StyleVector& prosodic,
                       const StyleVector& acoustic) const override {
    require_kind(prosodic, StyleKind::prosodic, "synthesize");
    require_kind(acoustic, StyleKind::acoustic, "synthesize");
    if (prosodic.dim() != kStyleDim) throw DimensionError("synthesize: prosodic style must have 8 entries");
    const std::vector<std::string> tokens = split_words(text);
    if (tokens.empty()) throw ArgumentError("synthesize: empty text");
    using namespace style_scale;

    const double sr = kSynthSampleRate;
    const double rate = std::max(kMinRate, prosodic[5] * max_rate);
    const double syllable_s = 1.0 / rate;
    const auto total = static_cast<std::size_t>(std::lround(static_cast<double>(tokens.size()) * syllable_s * sr));
    const double f0_mean = std::clamp(prosodic[0] * pitch_mean_hz, 60.0, 450.0);
    const double f0_std = std::clamp(prosodic[1] * pitch_std_hz, 0.0, 0.3 * f0_mean);
    const double hnr_db = prosodic[4] * hnr_span_db + kHnrFloorDb;
    const double target_rms = std::max(0.0, prosodic[2]);

    std::uint64_t seed = fnv1a(text);
    seed = fnv1a(prosodic.values(), seed);
    seed = fnv1a(acoustic.values(), seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.7, 1.0);

    // f0 control track at 100 Hz: AR(1), standardized, then scaled.
    const std::size_t ctrl_hop = static_cast<std::size_t>(sr / 100.0);
    const std::size_t n_ctrl = total / ctrl_hop + 2;
    std::vector<double> z(n_ctrl);
    const double rho = 0.998;
    z[0] = gauss(rng);
    for (std::size_t k = 1; k < n_ctrl; ++k) z[k] = rho * z[k - 1] + std::sqrt(1.0 - rho * rho) * gauss(rng);
    double zm = 0.0, zs = 0.0;
    detail::mean_std(z, zm, zs);
    for (double& v : z) v = zs > 0.0 ? (v - zm) / zs : 0.0;

    std::vector<double> weights(acoustic.values().begin(), acoustic.values().end());
    for (double& w : weights) w = std::max(0.0, w);
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
      const StyleVector d = default_acoustic_style();
      weights.assign(d.values().begin(), d.values().end());
    }

    std::vector<double> syllable_gain(tokens.size());
    for (double& g : syllable_gain) g = unif(rng);

    std::vector<double> carrier(total), env(total);
    double phase = 0.0, carrier_power = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
      const double pos = static_cast<double>(t) / static_cast<double>(ctrl_hop);
      const auto k0 = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(k0);
      const double zt = z[k0] * (1.0 - frac) + z[std::min(k0 + 1, n_ctrl - 1)] * frac;
      const double f0 = std::clamp(f0_mean + f0_std * zt, 55.0, 480.0);
      phase += 2.0 * std::numbers::pi * f0 / sr;
      if (phase > 2.0 * std::numbers::pi * 1024.0) phase -= 2.0 * std::numbers::pi * 1024.0;
      double v = 0.0;
      for (std::size_t h = 0; h < weights.size(); ++h) {
        const double fh = f0 * static_cast<double>(h + 1);
        const double fade = std::clamp((0.45 * sr - fh) / 200.0, 0.0, 1.0);
        v += fade * weights[h] * std::sin(static_cast<double>(h + 1) * phase);
      }
      carrier[t] = v;
      carrier_power += v * v;

      const double tsec = static_cast<double>(t) / sr;
      const auto syl = std::min(tokens.size() - 1, static_cast<std::size_t>(tsec / syllable_s));
      const double u = (tsec - static_cast<double>(syl) * syllable_s) / syllable_s;
      const double s = std::sin(std::numbers::pi * u);
      env[t] = syllable_gain[syl] * s * s;
    }
    carrier_power /= std::max<double>(1.0, static_cast<double>(total));
    const double noise_std = std::sqrt(carrier_power / std::pow(10.0, hnr_db / 10.0));

    std::vector<double> y(total);
    double peak = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
      y[t] = env[t] * (carrier[t] + noise_std * gauss(rng));
      peak = std::max(peak, std::abs(y[t]));
    }
    if (peak > 0.0) {
      for (double& v : y) v /= peak;
      const double measured = energy_stats(AudioClip(kSynthSampleRate, y)).mean;
      double gain = measured > 0.0 ? target_rms / measured : 0.0;
      gain = std::min(gain, 0.99);
      for (double& v : y) v *= gain;
    }
    return AudioClip(kSynthSampleRate, std::move(y));
  }

  double latency(const std::string& text, const AudioClip& output) const override {
    return latency_.evaluate(0.0, static_cast<double>(split_words(text).size()), output.duration_seconds());
  }

 private:
  LatencyModel latency_;
};

}  // namespace styletalk
