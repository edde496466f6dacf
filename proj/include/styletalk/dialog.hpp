#pragma once

// Dialog domain types: audio clips, style vectors, turns, conversations,
// the rolling conversation context and dialog crops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "styletalk/error.hpp"

namespace styletalk {

using SpeakerId = std::string;

// Number of style dimensions: pitch mean, pitch STD, energy mean, energy STD,
// HNR, speaking rate, log-duration, voiced fraction.
inline constexpr std::size_t kStyleDim = 8;

// Mono waveform. Samples are finite and within [-1, 1].
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(int sample_rate, std::vector<double> samples,
            std::optional<std::string> source_id = std::nullopt)
      : sample_rate_(sample_rate), samples_(std::move(samples)), source_id_(std::move(source_id)) {
    if (sample_rate_ <= 0) throw ArgumentError("AudioClip: sample rate must be positive");
    for (double s : samples_) {
      if (!std::isfinite(s) || s < -1.0 || s > 1.0)
        throw ArgumentError("AudioClip: samples must be finite and within [-1, 1]");
    }
  }

  int sample_rate() const { return sample_rate_; }
  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / static_cast<double>(sample_rate_);
  }
  const std::optional<std::string>& source_id() const { return source_id_; }

  AudioClip with_source_id(std::string id) const {
    AudioClip c = *this;
    c.source_id_ = std::move(id);
    return c;
  }

  friend bool operator==(const AudioClip&, const AudioClip&) = default;

 private:
  int sample_rate_ = 16000;
  std::vector<double> samples_;
  std::optional<std::string> source_id_;
};

enum class StyleKind { prosodic, acoustic };

inline const char* to_string(StyleKind k) {
  return k == StyleKind::prosodic ? "prosodic" : "acoustic";
}

// Fixed-length paralinguistic summary. Prosodic styles are predicted per
// turn; acoustic styles (timbre) are pre-computed per speaker.
class StyleVector {
 public:
  StyleVector() : values_(kStyleDim, 0.0) {}
  explicit StyleVector(std::vector<double> values, StyleKind kind = StyleKind::prosodic)
      : values_(std::move(values)), kind_(kind) {
    if (values_.empty()) throw DimensionError("StyleVector: dimension must be at least 1");
    for (double v : values_)
      if (!std::isfinite(v)) throw ArgumentError("StyleVector: entries must be finite");
  }

  static StyleVector zeros(StyleKind kind = StyleKind::prosodic, std::size_t dim = kStyleDim) {
    return StyleVector(std::vector<double>(dim, 0.0), kind);
  }

  std::size_t dim() const { return values_.size(); }
  StyleKind kind() const { return kind_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }

  friend bool operator==(const StyleVector&, const StyleVector&) = default;

 private:
  std::vector<double> values_;
  StyleKind kind_ = StyleKind::prosodic;
};

inline void require_kind(const StyleVector& s, StyleKind kind, const char* what) {
  if (s.kind() != kind)
    throw KindMismatchError(std::string(what) + ": expected " + to_string(kind) + " style, got " +
                            to_string(s.kind()));
}

// Parameters from which a synthetic turn's audio is rendered.
struct SynthParams {
  StyleVector prosodic;
  StyleVector acoustic{std::vector<double>(kStyleDim, 0.0), StyleKind::acoustic};

  friend bool operator==(const SynthParams&, const SynthParams&) = default;
};

struct Turn {
  SpeakerId speaker;
  std::string text;
  std::optional<AudioClip> audio;
  std::optional<StyleVector> prosodic_style;
  std::optional<std::string> audio_path;  // relative to the corpus root
  std::optional<SynthParams> synth;

  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class Split { train, validation, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw ArgumentError("unknown split '" + s + "'");
}

struct Conversation {
  std::string id;
  std::vector<Turn> turns;
  Split split = Split::train;

  friend bool operator==(const Conversation&, const Conversation&) = default;
};

struct ContextEntry {
  SpeakerId speaker;
  std::string text;
  StyleVector style;

  friend bool operator==(const ContextEntry&, const ContextEntry&) = default;
};

struct ReferenceStyle {
  StyleVector prosodic;
  StyleVector acoustic{std::vector<double>(kStyleDim, 0.0), StyleKind::acoustic};

  friend bool operator==(const ReferenceStyle&, const ReferenceStyle&) = default;
};

// Rolling dialog context. Value type: operations return new contexts.
struct ConversationContext {
  std::vector<ContextEntry> entries;
  std::map<SpeakerId, ReferenceStyle> reference_styles;

  friend bool operator==(const ConversationContext&, const ConversationContext&) = default;
};

// Turns 1..k of a conversation as context, turn k (the audio input) as the
// incoming turn and turn k+1 as the target.
struct DialogCrop {
  std::string conversation_id;
  std::size_t k = 1;
  std::vector<Turn> context_turns;
  Turn incoming_turn;
  Turn target_turn;

  // Stable identifier "<conversation>:<k>".
  std::string id() const { return conversation_id + ":" + std::to_string(k); }

  friend bool operator==(const DialogCrop&, const DialogCrop&) = default;
};

inline ConversationContext append_turn(const ConversationContext& context, SpeakerId speaker,
                                       std::string text, StyleVector style) {
  require_kind(style, StyleKind::prosodic, "append_turn");
  ConversationContext out = context;
  out.entries.push_back({std::move(speaker), std::move(text), std::move(style)});
  return out;
}

// k is 1-based: context = turns 1..k, incoming = turn k, target = turn k+1.
inline DialogCrop make_crop(const Conversation& conv, std::size_t k) {
  const std::size_t n = conv.turns.size();
  if (n < 2 || k < 1 || k > n - 1)
    throw RangeError("make_crop: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(n < 2 ? 0 : n - 1) + "] for conversation '" + conv.id + "'");
  DialogCrop crop;
  crop.conversation_id = conv.id;
  crop.k = k;
  crop.context_turns.assign(conv.turns.begin(), conv.turns.begin() + static_cast<std::ptrdiff_t>(k));
  crop.incoming_turn = conv.turns[k - 1];
  crop.target_turn = conv.turns[k];
  return crop;
}

inline ConversationContext window(const ConversationContext& context, std::size_t max_turns) {
  if (max_turns == 0) throw ArgumentError("window: max_turns must be at least 1");
  ConversationContext out;
  out.reference_styles = context.reference_styles;
  const std::size_t n = context.entries.size();
  const std::size_t keep = std::min(max_turns, n);
  out.entries.assign(context.entries.begin() + static_cast<std::ptrdiff_t>(n - keep),
                     context.entries.end());
  return out;
}

// Uniform over [1, len(turns) - 1]; deterministic per seed.
inline std::size_t sample_crop_index(const Conversation& conv, std::uint64_t rng_seed) {
  if (conv.turns.size() < 2)
    throw RangeError("sample_crop_index: conversation '" + conv.id + "' has no valid crop");
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> dist(1, conv.turns.size() - 1);
  return dist(rng);
}

}  // namespace styletalk
