#pragma once

// Corpus files, diarization filtering, verbatim normalization, splits and
// the synthetic corpus generator.
//
// One conversation per line:
//   {"id": str, "split": "train|validation|test",
//    "turns": [{"speaker": str, "text": str, "audio": path-or-null,
//               "synth": {"prosodic": [8 reals], "acoustic": [8 reals]},
//               "style": [8 reals]}]}
// "synth" and "style" are optional. Audio paths are relative to the corpus
// root; turns with synthesis parameters and no audio path are rendered on
// load.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "styletalk/components.hpp"
#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"
#include "styletalk/features.hpp"
#include "styletalk/metrics.hpp"
#include "styletalk/wav.hpp"

namespace styletalk {

inline constexpr const char* kCorpusRootEnv = "STYLETALK_CORPUS_ROOT";

// Stable id of a turn's audio, 1-based turn index.
inline std::string turn_source_id(const std::string& conversation_id, std::size_t turn_index) {
  return conversation_id + "#" + std::to_string(turn_index + 1);
}

// The environment override wins, then the directory holding the corpus file.
inline std::filesystem::path corpus_root(const std::filesystem::path& corpus_file) {
  if (const char* env = std::getenv(kCorpusRootEnv); env && *env) return env;
  return corpus_file.has_parent_path() ? corpus_file.parent_path() : std::filesystem::path(".");
}

inline AudioClip render_turn_audio(const std::string& text, const SynthParams& synth) {
  return HarmonicSynthesizer().synthesize(text, synth.prosodic, synth.acoustic);
}

struct CorpusReject {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<Conversation> conversations;
  std::vector<CorpusReject> rejects;
};

namespace detail {

inline StyleVector style_from_json(const nlohmann::json& j, StyleKind kind, const char* field) {
  if (!j.is_array() || j.size() != kStyleDim)
    throw ArgumentError(std::string("\"") + field + "\" must be an array of " + std::to_string(kStyleDim) + " numbers");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ArgumentError(std::string("\"") + field + "\" must contain numbers only");
    v.push_back(x.get<double>());
  }
  return StyleVector(std::move(v), kind);
}

inline nlohmann::json style_to_json(const StyleVector& s) {
  return nlohmann::json(std::vector<double>(s.values().begin(), s.values().end()));
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* name, const char* where) {
  if (!j.is_object() || !j.contains(name))
    throw ArgumentError(std::string(where) + " is missing \"" + name + "\"");
  return j.at(name);
}

inline Conversation conversation_from_json(const nlohmann::json& j, const std::filesystem::path& root,
                                           bool load_audio) {
  Conversation c;
  const auto& id = require_field(j, "id", "conversation");
  if (!id.is_string() || id.get<std::string>().empty()) throw ArgumentError("\"id\" must be a non-empty string");
  c.id = id.get<std::string>();
  const auto& split = require_field(j, "split", "conversation");
  if (!split.is_string()) throw ArgumentError("\"split\" must be a string");
  c.split = parse_split(split.get<std::string>());
  const auto& turns = require_field(j, "turns", "conversation");
  if (!turns.is_array() || turns.size() < 2) throw ArgumentError("\"turns\" must be an array of at least 2 turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const std::string where = "turn " + std::to_string(i + 1);
    const auto& tj = turns[i];
    Turn t;
    const auto& speaker = require_field(tj, "speaker", where.c_str());
    if (!speaker.is_string() || speaker.get<std::string>().empty())
      throw ArgumentError(where + ": \"speaker\" must be a non-empty string");
    t.speaker = speaker.get<std::string>();
    const auto& text = require_field(tj, "text", where.c_str());
    if (!text.is_string()) throw ArgumentError(where + ": \"text\" must be a string");
    t.text = text.get<std::string>();
    if (tj.contains("synth") && !tj.at("synth").is_null()) {
      const auto& sj = tj.at("synth");
      t.synth = SynthParams{style_from_json(require_field(sj, "prosodic", "synth"), StyleKind::prosodic, "prosodic"),
                            style_from_json(require_field(sj, "acoustic", "synth"), StyleKind::acoustic, "acoustic")};
      t.prosodic_style = t.synth->prosodic;
    }
    if (tj.contains("style") && !tj.at("style").is_null())
      t.prosodic_style = style_from_json(tj.at("style"), StyleKind::prosodic, "style");
    const std::string sid = turn_source_id(c.id, i);
    if (tj.contains("audio") && !tj.at("audio").is_null()) {
      if (!tj.at("audio").is_string()) throw ArgumentError(where + ": \"audio\" must be a path or null");
      t.audio_path = tj.at("audio").get<std::string>();
      if (load_audio) t.audio = read_wav(root / *t.audio_path, sid);
    } else if (t.synth && load_audio) {
      if (split_words(t.text).empty()) throw ArgumentError(where + ": cannot render audio for empty text");
      t.audio = render_turn_audio(t.text, *t.synth).with_source_id(sid);
    }
    c.turns.push_back(std::move(t));
  }
  return c;
}

}  // namespace detail

// Malformed records are collected with their line numbers; the rest load.
inline LoadResult load_corpus(const std::filesystem::path& path, bool load_audio = true,
                              std::optional<std::filesystem::path> root = std::nullopt) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read corpus '" + path.string() + "'");
  const std::filesystem::path base = root ? *root : corpus_root(path);
  LoadResult out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); })) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Conversation c = detail::conversation_from_json(j, base, load_audio);
      if (!seen.insert(c.id).second) throw ArgumentError("duplicate conversation id '" + c.id + "'");
      out.conversations.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      out.rejects.push_back({lineno, std::string("malformed record: ") + e.what()});
    } catch (const Error& e) {
      out.rejects.push_back({lineno, e.what()});
    }
  }
  if (out.conversations.empty())
    throw ConfigError("corpus '" + path.string() + "' has no valid conversations (" +
                      std::to_string(out.rejects.size()) + " rejected)");
  return out;
}

inline nlohmann::json conversation_to_json(const Conversation& c) {
  nlohmann::json turns = nlohmann::json::array();
  for (const Turn& t : c.turns) {
    nlohmann::json j;
    j["speaker"] = t.speaker;
    j["text"] = t.text;
    j["audio"] = t.audio_path ? nlohmann::json(*t.audio_path) : nlohmann::json(nullptr);
    if (t.synth)
      j["synth"] = {{"prosodic", detail::style_to_json(t.synth->prosodic)},
                    {"acoustic", detail::style_to_json(t.synth->acoustic)}};
    if (t.prosodic_style && (!t.synth || !(t.synth->prosodic == *t.prosodic_style)))
      j["style"] = detail::style_to_json(*t.prosodic_style);
    turns.push_back(std::move(j));
  }
  return {{"id", c.id}, {"split", to_string(c.split)}, {"turns", std::move(turns)}};
}

// Turns holding audio without a path or synthesis parameters get their WAV
// written under <root>/audio/.
inline void save_corpus(const std::filesystem::path& path, const std::vector<Conversation>& convs,
                        std::optional<std::filesystem::path> root = std::nullopt) {
  const std::filesystem::path base =
      root ? *root : (path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  std::string out;
  for (const Conversation& c : convs) {
    Conversation copy = c;
    for (std::size_t i = 0; i < copy.turns.size(); ++i) {
      Turn& t = copy.turns[i];
      if (t.audio && !t.audio_path && !t.synth) {
        std::string stem = c.id + "_" + std::to_string(i + 1);
        std::replace_if(stem.begin(), stem.end(), [](char ch) { return ch == '/' || ch == '\\' || ch == ':'; }, '_');
        t.audio_path = "audio/" + stem + ".wav";
        write_wav(base / *t.audio_path, *t.audio);
      }
    }
    out += conversation_to_json(copy).dump();
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Diarization filtering

inline constexpr const char* kSpeakerIndicatorPattern = R"(\[S\d+\])";

enum class DiarizationVerdict { keep, discard };

// Discards a transcript carrying two or more distinct speaker indicators.
inline DiarizationVerdict filter_diarization(const std::string& transcript,
                                             const std::string& pattern = kSpeakerIndicatorPattern) {
  const std::regex re(pattern);
  std::set<std::string> distinct;
  for (auto it = std::sregex_iterator(transcript.begin(), transcript.end(), re); it != std::sregex_iterator(); ++it)
    distinct.insert(it->str());
  return distinct.size() >= 2 ? DiarizationVerdict::discard : DiarizationVerdict::keep;
}

// Removes one speaker indicator at the start of a kept transcript.
inline std::string strip_leading_indicator(const std::string& transcript, bool* stripped = nullptr,
                                           const std::string& pattern = kSpeakerIndicatorPattern) {
  const std::regex re("^\\s*" + pattern + "\\s*");
  std::smatch m;
  const bool hit = std::regex_search(transcript, m, re);
  if (stripped) *stripped = hit;
  return hit ? transcript.substr(static_cast<std::size_t>(m.length(0))) : transcript;
}

inline std::string normalize_verbatim(const std::string& text, const NormalizationPolicy& policy = {}) {
  return normalize(text, policy);
}

struct IngestOptions {
  bool filter_diarization = true;
  bool normalize_text = false;
  NormalizationPolicy policy;
  std::string indicator_pattern = kSpeakerIndicatorPattern;
};

struct IngestReport {
  std::size_t conversations_in = 0;
  std::size_t conversations_out = 0;
  std::size_t turns_in = 0;
  std::size_t turns_out = 0;
  std::size_t discarded_multi_speaker = 0;
  std::size_t stripped_indicators = 0;
  std::size_t dropped_short_conversations = 0;  // fewer than 2 turns left
};

inline std::vector<Conversation> ingest(const std::vector<Conversation>& convs, const IngestOptions& opt,
                                        IngestReport& report) {
  report = {};
  std::vector<Conversation> out;
  for (const Conversation& c : convs) {
    ++report.conversations_in;
    Conversation kept{c.id, {}, c.split};
    for (const Turn& t : c.turns) {
      ++report.turns_in;
      Turn turn = t;
      if (opt.filter_diarization) {
        if (filter_diarization(turn.text, opt.indicator_pattern) == DiarizationVerdict::discard) {
          ++report.discarded_multi_speaker;
          continue;
        }
        bool stripped = false;
        turn.text = strip_leading_indicator(turn.text, &stripped, opt.indicator_pattern);
        if (stripped) ++report.stripped_indicators;
      }
      if (opt.normalize_text) turn.text = normalize_verbatim(turn.text, opt.policy);
      kept.turns.push_back(std::move(turn));
    }
    if (kept.turns.size() < 2) {
      ++report.dropped_short_conversations;
      continue;
    }
    report.turns_out += kept.turns.size();
    out.push_back(std::move(kept));
  }
  report.conversations_out = out.size();
  return out;
}

// ---------------------------------------------------------------------------
// Splits

// Largest-remainder bucket sizes; every non-zero ratio gets at least one.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ArgumentError("split_corpus: ratios must be >= 0");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("split_corpus: ratios must sum to 1");
  const auto nonzero = static_cast<std::size_t>(std::count_if(ratios.begin(), ratios.end(), [](double r) { return r > 0.0; }));
  if (n < nonzero)
    throw ArgumentError("split_corpus: " + std::to_string(n) + " conversations for " + std::to_string(nonzero) +
                        " non-empty splits");
  std::array<std::size_t, 3> size{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double q = ratios[i] * static_cast<double>(n);
    size[i] = static_cast<std::size_t>(std::floor(q + 1e-9));
    frac[i] = q - static_cast<double>(size[i]);
    assigned += size[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++size[order[k % 3]];
  for (std::size_t i = 0; i < 3; ++i) {
    if (ratios[i] > 0.0 && size[i] == 0) {
      const auto big = static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
      --size[big];
      size[i] = 1;
    }
  }
  return size;
}

// Assigns whole conversations to train/validation/test; order is kept.
inline std::vector<Conversation> split_corpus(std::vector<Conversation> convs, const std::array<double, 3>& ratios,
                                              std::uint64_t seed) {
  const std::array<std::size_t, 3> size = split_sizes(convs.size(), ratios);
  std::vector<std::size_t> perm(convs.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> d(0, i - 1);
    std::swap(perm[i - 1], perm[d(rng)]);
  }
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const Split s = k < size[0] ? Split::train : (k < size[0] + size[1] ? Split::validation : Split::test);
    convs[perm[k]].split = s;
  }
  return convs;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SpeakerPrior {
  SpeakerId id;
  ProsodyControls center;
  StyleVector timbre{std::vector<double>(kStyleDim, 0.0), StyleKind::acoustic};
};

namespace detail {

inline const std::vector<std::string>& speaker_pool() {
  static const std::vector<std::string> p{"Ava", "Ben", "Cleo", "Dev", "Eli", "Fay"};
  return p;
}

template <class Rng>
const std::string& pick(Rng& rng, const std::vector<std::string>& v) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

template <class Rng>
std::string synthetic_sentence(Rng& rng) {
  static const std::vector<std::string> openers{"", "", "", "Um, ", "Well, ", "Oh, ", "Uh, ", "Hey, "};
  static const std::vector<std::string> subjects{"I", "we", "you", "my sister", "the team", "our neighbor", "the manager"};
  static const std::vector<std::string> verbs{"found", "needed", "painted", "cooked", "fixed", "visited", "ordered",
                                              "booked", "watched", "missed"};
  static const std::vector<std::string> objects{"the garden", "a new bike", "the kitchen", "that little cafe",
                                                "the museum", "a cheap ticket", "the old car", "some fresh bread",
                                                "the morning train", "a quiet room"};
  static const std::vector<std::string> tails{"yesterday", "last week", "this morning", "after work", "on sunday",
                                              "again", "for the party", "near the station"};
  static const std::vector<std::string> questions{"Do you want to come along?", "What do you think?",
                                                  "Have you been there?", "Can you help me tomorrow?",
                                                  "Is that okay with you?", "Did you hear about it?"};
  static const std::vector<std::string> replies{"That sounds great.", "I am not so sure.", "Really, that is wonderful.",
                                                "Oh no, that is too bad.", "Sure, why not.", "Let me think about it."};
  std::uniform_int_distribution<int> form(0, 5);
  const int f = form(rng);
  std::string s;
  if (f <= 2) {
    std::string subj = pick(rng, subjects);
    std::string open = pick(rng, openers);
    if (open.empty()) subj[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(subj[0])));
    s = open + subj + " " + pick(rng, verbs) + " " + pick(rng, objects) + " " + pick(rng, tails) + ".";
  } else if (f == 3) {
    s = pick(rng, replies) + " " + pick(rng, questions);
  } else if (f == 4) {
    s = pick(rng, replies);
    std::string subj = pick(rng, subjects);
    s += " " + std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(subj[0])))) + subj.substr(1) +
         " " + pick(rng, verbs) + " " + pick(rng, objects) + ".";
  } else {
    std::string subj = pick(rng, subjects);
    subj[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(subj[0])));
    s = subj + " " + pick(rng, verbs) + " " + pick(rng, objects) + ". " + pick(rng, questions);
  }
  return s;
}

}  // namespace detail

// Per-speaker priors spread over the controllable range.
inline std::vector<SpeakerPrior> synthetic_speakers(std::uint64_t seed) {
  namespace cr = controllable;
  std::mt19937_64 rng(seed ^ 0x5EEDULL);
  std::vector<SpeakerPrior> out;
  const auto& pool = detail::speaker_pool();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    SpeakerPrior p;
    p.id = pool[i];
    // Pitch centers are stratified so speakers stay well separated.
    const double slot = (cr::pitch_max_hz - 20.0 - (cr::pitch_min_hz + 15.0)) / static_cast<double>(pool.size());
    p.center.pitch_hz = cr::pitch_min_hz + 15.0 + slot * (static_cast<double>(i) + u(0.2, 0.8));
    p.center.pitch_std_hz = u(7.0, 18.0);
    p.center.energy = u(0.03, 0.10);
    p.center.hnr_db = u(3.0, 15.0);
    p.center.rate = u(3.0, 5.5);
    const double tilt = u(0.6, 1.6);
    std::vector<double> w(kStyleDim);
    for (std::size_t k = 0; k < kStyleDim; ++k) w[k] = std::pow(static_cast<double>(k + 1), -tilt) * u(0.8, 1.0);
    const double top = *std::max_element(w.begin(), w.end());
    for (double& x : w) x /= top;
    p.timbre = StyleVector(std::move(w), StyleKind::acoustic);
    out.push_back(std::move(p));
  }
  return out;
}

// Conversations of 4-8 turns between 2-3 speakers; every turn carries
// template text and synthesis parameters drawn around its speaker's prior.
// Audio is rendered from those parameters when `render` is set.
inline std::vector<Conversation> generate_synthetic_corpus(std::size_t n_conversations, std::uint64_t seed,
                                                           bool render = true) {
  if (n_conversations == 0) throw ArgumentError("generate_synthetic_corpus: need at least one conversation");
  namespace cr = controllable;
  const std::vector<SpeakerPrior> speakers = synthetic_speakers(seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Conversation> out;
  for (std::size_t c = 0; c < n_conversations; ++c) {
    Conversation conv;
    char buf[32];
    std::snprintf(buf, sizeof buf, "syn%03zu", c + 1);
    conv.id = buf;
    const std::size_t n_speakers = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
    const std::size_t n_turns = std::uniform_int_distribution<std::size_t>(4, 8)(rng);
    std::vector<std::size_t> idx(speakers.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n_speakers);
    std::size_t current = 0;
    for (std::size_t t = 0; t < n_turns; ++t) {
      if (t > 0) {
        const std::size_t step = n_speakers == 2 ? 1 : std::uniform_int_distribution<std::size_t>(1, n_speakers - 1)(rng);
        current = (current + step) % n_speakers;
      }
      const SpeakerPrior& sp = speakers[idx[current]];
      ProsodyControls pc;
      pc.pitch_hz = std::clamp(sp.center.pitch_hz + 6.0 * gauss(rng), cr::pitch_min_hz, cr::pitch_max_hz);
      pc.pitch_std_hz = std::clamp(sp.center.pitch_std_hz + 1.0 * gauss(rng), cr::pitch_std_min_hz, cr::pitch_std_max_hz);
      pc.energy = std::clamp(sp.center.energy + 0.005 * gauss(rng), cr::energy_min, cr::energy_max);
      pc.hnr_db = std::clamp(sp.center.hnr_db + 1.0 * gauss(rng), cr::hnr_min_db, cr::hnr_max_db);
      pc.rate = std::clamp(sp.center.rate + 0.2 * gauss(rng), cr::rate_min, cr::rate_max);
      Turn turn;
      turn.speaker = sp.id;
      turn.text = detail::synthetic_sentence(rng);
      turn.synth = SynthParams{make_prosodic_style(pc), sp.timbre};
      turn.prosodic_style = turn.synth->prosodic;
      if (render) turn.audio = render_turn_audio(turn.text, *turn.synth).with_source_id(turn_source_id(conv.id, t));
      conv.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(conv));
  }
  if (out.size() < 3) return out;
  return split_corpus(std::move(out), {0.8, 0.1, 0.1}, seed);
}

}  // namespace styletalk
