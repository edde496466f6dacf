#pragma once

// Text-generation metrics (WER, BLEU, ROUGE-L, exact METEOR, greedy
// embedding score), correlation and cosine similarity, and per-run report
// assembly.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "styletalk/components.hpp"
#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"
#include "styletalk/features.hpp"

namespace styletalk {

// ---------------------------------------------------------------------------
// Normalization

struct NormalizationPolicy {
  bool lowercase = true;
  bool strip_punctuation = true;
  // Entries may span several words ("you know").
  std::vector<std::string> fillers = default_fillers();

  static std::vector<std::string> default_fillers() { return {"um", "uh", "uhm", "er", "ah"}; }
  static std::vector<std::string> extended_fillers() {
    std::vector<std::string> f = default_fillers();
    f.push_back("like");
    f.push_back("you know");
    return f;
  }
  static NormalizationPolicy none() { return {false, false, {}}; }
};

namespace detail {

inline bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace detail

// Lowercases, replaces punctuation with spaces (hyphens and apostrophes
// between word characters survive), drops filler tokens and collapses
// whitespace.
inline std::string normalize(std::string_view text, const NormalizationPolicy& policy = {}) {
  std::string s(text);
  if (policy.lowercase)
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (policy.strip_punctuation) {
    std::string out(s.size(), ' ');
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (!std::ispunct(static_cast<unsigned char>(c))) {
        out[i] = c;
      } else if ((c == '-' || c == '\'') && i > 0 && i + 1 < s.size() && detail::is_word_char(s[i - 1]) &&
                 detail::is_word_char(s[i + 1])) {
        out[i] = c;
      }
    }
    s = std::move(out);
  }
  const std::vector<std::string> words = split_words(s);
  std::vector<std::vector<std::string>> fillers;
  for (const std::string& f : policy.fillers) {
    std::vector<std::string> fw = split_words(f);
    if (policy.lowercase)
      for (std::string& w : fw)
        for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!fw.empty()) fillers.push_back(std::move(fw));
  }
  std::sort(fillers.begin(), fillers.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::vector<std::string> kept;
  for (std::size_t i = 0; i < words.size();) {
    std::size_t skip = 0;
    for (const auto& f : fillers) {
      if (i + f.size() <= words.size() && std::equal(f.begin(), f.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
        skip = f.size();
        break;
      }
    }
    if (skip) {
      i += skip;
    } else {
      kept.push_back(words[i++]);
    }
  }
  return join_words(kept);
}

inline std::vector<std::string> normalized_words(std::string_view text, const NormalizationPolicy& policy) {
  return split_words(normalize(text, policy));
}

// ---------------------------------------------------------------------------
// WER

inline std::size_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct WerResult {
  double value = 0.0;
  std::size_t edits = 0;
  std::size_t reference_words = 0;
  // Empty reference with a non-empty hypothesis: value = insertions / 1.
  bool empty_reference = false;
};

inline WerResult wer_detail(std::string_view ref, std::string_view hyp, const NormalizationPolicy& policy = {}) {
  const auto r = normalized_words(ref, policy);
  const auto h = normalized_words(hyp, policy);
  WerResult out;
  out.edits = edit_distance(r, h);
  out.reference_words = r.size();
  if (r.empty()) {
    out.empty_reference = !h.empty();
    out.value = static_cast<double>(out.edits);
  } else {
    out.value = static_cast<double>(out.edits) / static_cast<double>(r.size());
  }
  return out;
}

inline double wer(std::string_view ref, std::string_view hyp, const NormalizationPolicy& policy = {}) {
  return wer_detail(ref, hyp, policy).value;
}

// ---------------------------------------------------------------------------
// BLEU

inline constexpr const char* kBleuSmoothing = "add-one-on-zero";

struct BleuStats {
  std::vector<std::size_t> matches;  // clipped, per order
  std::vector<std::size_t> totals;   // hypothesis n-grams, per order
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;  // closest reference length, ties to the shorter

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t n = 0; n < matches.size(); ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
};

struct BleuResult {
  double score = 0.0;  // percentage
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  bool empty_hypothesis = false;
  std::string smoothing = kBleuSmoothing;
};

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& w, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> out;
  for (std::size_t i = 0; i + n <= w.size(); ++i)
    ++out[std::vector<std::string>(w.begin() + static_cast<std::ptrdiff_t>(i),
                                   w.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace detail

inline BleuStats bleu_stats(const std::vector<std::string>& refs, std::string_view hyp, std::size_t max_n = 4,
                            const NormalizationPolicy& policy = {}) {
  if (refs.empty()) throw ArgumentError("bleu: at least one reference is required");
  if (max_n == 0) throw ArgumentError("bleu: max_n must be at least 1");
  const auto h = normalized_words(hyp, policy);
  std::vector<std::vector<std::string>> r;
  for (const std::string& s : refs) r.push_back(normalized_words(s, policy));

  BleuStats st;
  st.matches.assign(max_n, 0);
  st.totals.assign(max_n, 0);
  st.hyp_len = h.size();
  st.ref_len = r.front().size();
  for (const auto& ref : r) {
    const auto d = [&](std::size_t len) { return len > h.size() ? len - h.size() : h.size() - len; };
    if (d(ref.size()) < d(st.ref_len) || (d(ref.size()) == d(st.ref_len) && ref.size() < st.ref_len))
      st.ref_len = ref.size();
  }
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto hc = detail::ngram_counts(h, n);
    std::map<std::vector<std::string>, std::size_t> max_ref;
    for (const auto& ref : r)
      for (const auto& [g, c] : detail::ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], c);
    for (const auto& [g, c] : hc) {
      st.totals[n - 1] += c;
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) st.matches[n - 1] += std::min(c, it->second);
    }
  }
  return st;
}

// Zero-match orders above 1 use precision 1 / (total + 1).
inline BleuResult bleu_from_stats(const BleuStats& st) {
  BleuResult out;
  if (st.hyp_len == 0) {
    out.empty_hypothesis = true;
    out.precisions.assign(st.matches.size(), 0.0);
    return out;
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < st.matches.size(); ++n) {
    double p;
    if (st.matches[n] > 0) {
      p = static_cast<double>(st.matches[n]) / static_cast<double>(st.totals[n]);
    } else if (n == 0) {
      p = 0.0;
      zero = true;
    } else {
      p = 1.0 / static_cast<double>(st.totals[n] + 1);
    }
    out.precisions.push_back(p);
    if (p > 0.0) log_sum += std::log(p);
  }
  const double c = static_cast<double>(st.hyp_len);
  const double r = static_cast<double>(st.ref_len);
  out.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);
  out.score = zero ? 0.0 : 100.0 * out.brevity_penalty * std::exp(log_sum / static_cast<double>(st.matches.size()));
  out.score = std::clamp(out.score, 0.0, 100.0);
  return out;
}

inline BleuResult bleu_detail(const std::vector<std::string>& refs, std::string_view hyp, std::size_t max_n = 4,
                              const NormalizationPolicy& policy = {}) {
  return bleu_from_stats(bleu_stats(refs, hyp, max_n, policy));
}

inline double bleu(const std::vector<std::string>& refs, std::string_view hyp, std::size_t max_n = 4,
                   const NormalizationPolicy& policy = {}) {
  return bleu_detail(refs, hyp, max_n, policy).score;
}

// Corpus-level: n-gram counts and lengths summed over segments.
inline BleuResult corpus_bleu(const std::vector<std::vector<std::string>>& refs, const std::vector<std::string>& hyps,
                              std::size_t max_n = 4, const NormalizationPolicy& policy = {}) {
  if (refs.size() != hyps.size()) throw ArgumentError("corpus_bleu: reference and hypothesis counts differ");
  if (hyps.empty()) throw ArgumentError("corpus_bleu: no segments");
  BleuStats total;
  total.matches.assign(max_n, 0);
  total.totals.assign(max_n, 0);
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(refs[i], hyps[i], max_n, policy);
  return bleu_from_stats(total);
}

// ---------------------------------------------------------------------------
// ROUGE-L

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double rouge_l_f1(std::string_view ref, std::string_view hyp, const NormalizationPolicy& policy = {}) {
  const auto r = normalized_words(ref, policy);
  const auto h = normalized_words(hyp, policy);
  const std::size_t l = lcs_length(r, h);
  if (l == 0) return 0.0;
  const double p = static_cast<double>(l) / static_cast<double>(h.size());
  const double rec = static_cast<double>(l) / static_cast<double>(r.size());
  return 100.0 * 2.0 * p * rec / (p + rec);
}

// ---------------------------------------------------------------------------
// METEOR, exact matching only

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// Maximum unigram matching with the fewest chunks. A chunk is a run of
// matches adjacent in both strings and in the same order.
inline MeteorAlignment meteor_align(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::map<std::string, std::size_t> rc, hc;
  for (const auto& w : ref) ++rc[w];
  for (const auto& w : hyp) ++hc[w];
  MeteorAlignment out;
  std::map<std::string, std::size_t> need;  // matches each word must receive
  for (const auto& [w, c] : hc) {
    const auto it = rc.find(w);
    if (it != rc.end()) {
      need[w] = std::min(c, it->second);
      out.matches += need[w];
    }
  }
  if (out.matches == 0) return out;

  // hyp_left[i][w]: occurrences of w in hyp[i..]. A skip at i is legal only if
  // the remaining occurrences can still meet the quota.
  std::vector<std::size_t> remaining_after(hyp.size(), 0);
  for (std::size_t i = 0; i < hyp.size(); ++i)
    for (std::size_t k = i + 1; k < hyp.size(); ++k)
      if (hyp[k] == hyp[i]) ++remaining_after[i];

  std::map<std::string, std::vector<std::size_t>> positions;
  for (std::size_t j = 0; j < ref.size(); ++j) positions[ref[j]].push_back(j);

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<char> used(ref.size(), 0);
  std::map<std::string, std::size_t> got;
  std::unordered_map<std::string, std::size_t> memo;

  // Returns the fewest chunk starts among hyp[i..] given the ref position
  // matched by hyp[i-1] (kNone when hyp[i-1] is unmatched).
  std::function<std::size_t(std::size_t, std::size_t)> best = [&](std::size_t i, std::size_t prev) -> std::size_t {
    if (i == hyp.size()) return 0;
    std::string key = std::to_string(i) + ':' + std::to_string(prev) + ':';
    key.append(used.begin(), used.end());
    if (const auto it = memo.find(key); it != memo.end()) return it->second;

    const std::string& w = hyp[i];
    std::size_t result = std::numeric_limits<std::size_t>::max() / 2;
    const auto nit = need.find(w);
    const std::size_t quota = nit == need.end() ? 0 : nit->second;
    const std::size_t have = got[w];
    if (have + remaining_after[i] >= quota) result = best(i + 1, kNone);
    if (have < quota) {
      for (std::size_t j : positions[w]) {
        if (used[j]) continue;
        used[j] = 1;
        ++got[w];
        const std::size_t start = (prev != kNone && j == prev + 1) ? 0 : 1;
        result = std::min(result, start + best(i + 1, j));
        --got[w];
        used[j] = 0;
      }
    }
    memo.emplace(std::move(key), result);
    return result;
  };
  out.chunks = best(0, kNone);
  return out;
}

inline double meteor_exact(std::string_view ref, std::string_view hyp, const NormalizationPolicy& policy = {}) {
  const auto r = normalized_words(ref, policy);
  const auto h = normalized_words(hyp, policy);
  const MeteorAlignment a = meteor_align(r, h);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(h.size());
  const double rec = m / static_cast<double>(r.size());
  const double fmean = 10.0 * p * rec / (rec + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return 100.0 * fmean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------
// Greedy embedding score

using Embedder = std::function<std::vector<double>(const std::string&)>;

inline constexpr std::size_t kTrigramDims = 256;

// Hashed character-trigram profile of "#word#", L2-normalized.
inline std::vector<double> trigram_embedding(const std::string& token) {
  std::vector<double> v(kTrigramDims, 0.0);
  const std::string padded = "#" + token + "#";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
    v[fnv1a(std::string_view(padded).substr(i, 3)) % kTrigramDims] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return v;
}

inline Embedder default_embedder() { return trigram_embedding; }

// Best cosines below zero count as zero.
inline double greedy_embed_score(std::string_view ref, std::string_view hyp, const Embedder& embed = default_embedder(),
                                 const NormalizationPolicy& policy = {}) {
  const auto r = normalized_words(ref, policy);
  const auto h = normalized_words(hyp, policy);
  if (r.empty() || h.empty()) return 0.0;
  std::vector<std::vector<double>> re, he;
  for (const auto& w : r) re.push_back(embed(w));
  for (const auto& w : h) he.push_back(embed(w));
  std::vector<double> best_r(r.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> best_h(h.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (he[i].size() != re[j].size()) throw DimensionError("greedy_embed_score: embedding dimensions differ");
      double dot = 0.0;
      for (std::size_t k = 0; k < he[i].size(); ++k) dot += he[i][k] * re[j][k];
      best_h[i] = std::max(best_h[i], dot);
      best_r[j] = std::max(best_r[j], dot);
    }
  }
  double p = 0.0, rec = 0.0;
  for (double v : best_h) p += std::max(0.0, v);
  for (double v : best_r) rec += std::max(0.0, v);
  p /= static_cast<double>(h.size());
  rec /= static_cast<double>(r.size());
  if (p + rec <= 0.0) return 0.0;
  return std::clamp(100.0 * 2.0 * p * rec / (p + rec), 0.0, 100.0);
}

// ---------------------------------------------------------------------------
// Statistics

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: lengths differ");
  if (x.size() < 2) throw ArgumentError("pearson: at least two points are required");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedCorrelationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine: dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw ArgumentError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Report

struct EvalRecord {
  std::string crop_id;
  std::string text;
  std::optional<std::string> asr_text;  // recognition of the synthesized speech
  std::optional<AudioClip> audio;
};

inline const std::vector<std::string>& semantic_columns() {
  static const std::vector<std::string> c{"BLEU", "ROUGE-L", "METEOR", "EmbedScore", "WER"};
  return c;
}

inline const std::vector<std::string>& acoustic_columns() {
  static const std::vector<std::string> c{"pitch_mean", "pitch_std", "energy_mean", "energy_std", "hnr", "duration"};
  return c;
}

struct MetricReport {
  std::map<std::string, double> semantic;
  std::map<std::string, std::optional<double>> acoustic;  // nullopt: undefined correlation
  std::optional<double> speaker_similarity;
  std::size_t crops = 0;
  // WER source: "intelligibility" (text vs recognized speech) or "reference".
  std::string wer_mode;
  std::vector<std::string> warnings;
};

inline std::vector<double> acoustic_feature_row(const AcousticSummary& s) {
  return {s.pitch_mean, s.pitch_std, s.energy_mean, s.energy_std, s.hnr_db, s.duration_s};
}

// Semantic metrics are corpus-level (BLEU, WER) or means over crops; WER
// scores the generated text against the recognition of the generated
// speech when every record has one, and the reference text otherwise.
inline MetricReport assemble_report(const std::vector<EvalRecord>& generated, const std::vector<EvalRecord>& truth,
                                    const NormalizationPolicy& policy = {}, const Embedder& embed = default_embedder()) {
  if (generated.size() != truth.size())
    throw ArgumentError("assemble_report: " + std::to_string(generated.size()) + " generated vs " +
                        std::to_string(truth.size()) + " reference records");
  if (generated.empty()) throw ArgumentError("assemble_report: no records");
  for (std::size_t i = 0; i < generated.size(); ++i)
    if (generated[i].crop_id != truth[i].crop_id)
      throw ArgumentError("assemble_report: record " + std::to_string(i) + " pairs crop '" + generated[i].crop_id +
                          "' with '" + truth[i].crop_id + "'");

  MetricReport rep;
  rep.crops = generated.size();
  const double n = static_cast<double>(generated.size());

  std::vector<std::vector<std::string>> refs;
  std::vector<std::string> hyps;
  double rouge = 0.0, meteor = 0.0, embed_score = 0.0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    refs.push_back({truth[i].text});
    hyps.push_back(generated[i].text);
    rouge += rouge_l_f1(truth[i].text, generated[i].text, policy);
    meteor += meteor_exact(truth[i].text, generated[i].text, policy);
    embed_score += greedy_embed_score(truth[i].text, generated[i].text, embed, policy);
  }
  const BleuResult b = corpus_bleu(refs, hyps, 4, policy);
  if (b.empty_hypothesis) rep.warnings.push_back("bleu: empty hypothesis");
  rep.semantic["BLEU"] = b.score;
  rep.semantic["ROUGE-L"] = rouge / n;
  rep.semantic["METEOR"] = meteor / n;
  rep.semantic["EmbedScore"] = embed_score / n;

  const bool intelligibility =
      std::all_of(generated.begin(), generated.end(), [](const EvalRecord& r) { return r.asr_text.has_value(); });
  rep.wer_mode = intelligibility ? "intelligibility" : "reference";
  std::size_t edits = 0, words = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const WerResult w = intelligibility ? wer_detail(generated[i].text, *generated[i].asr_text, policy)
                                        : wer_detail(truth[i].text, generated[i].text, policy);
    edits += w.edits;
    words += w.reference_words;
  }
  if (words == 0) {
    rep.warnings.push_back("wer: empty references, insertions counted per one word");
    rep.semantic["WER"] = 100.0 * static_cast<double>(edits);
  } else {
    rep.semantic["WER"] = 100.0 * static_cast<double>(edits) / static_cast<double>(words);
  }

  const bool have_audio = std::all_of(generated.begin(), generated.end(), [](const EvalRecord& r) { return r.audio.has_value(); }) &&
                          std::all_of(truth.begin(), truth.end(), [](const EvalRecord& r) { return r.audio.has_value(); });
  if (!have_audio) {
    rep.warnings.push_back("acoustic: audio missing, correlations skipped");
    for (const auto& c : acoustic_columns()) rep.acoustic[c] = std::nullopt;
    return rep;
  }
  const std::size_t cols = acoustic_columns().size();
  std::vector<std::vector<double>> gx(cols), tx(cols);
  double sim = 0.0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto g = acoustic_feature_row(summarize(*generated[i].audio));
    const auto t = acoustic_feature_row(summarize(*truth[i].audio));
    for (std::size_t c = 0; c < cols; ++c) {
      gx[c].push_back(g[c]);
      tx[c].push_back(t[c]);
    }
    sim += cosine(acoustic_embedding(*generated[i].audio), acoustic_embedding(*truth[i].audio));
  }
  rep.speaker_similarity = sim / n;
  for (std::size_t c = 0; c < cols; ++c) {
    try {
      rep.acoustic[acoustic_columns()[c]] = pearson(gx[c], tx[c]);
    } catch (const Error&) {
      rep.acoustic[acoustic_columns()[c]] = std::nullopt;
    }
  }
  return rep;
}

namespace detail {

inline std::string format_cell(std::optional<double> v, int precision) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

inline std::string aligned_table(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) w[i] = std::max(header[i].size(), row[i].size());
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "  " : "") << std::setw(static_cast<int>(w[i])) << header[i];
  os << '\n';
  for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "  " : "") << std::setw(static_cast<int>(w[i])) << row[i];
  os << '\n';
  return os.str();
}

}  // namespace detail

inline std::string format_semantic_table(const MetricReport& r) {
  std::vector<std::string> row;
  for (const auto& c : semantic_columns()) {
    const auto it = r.semantic.find(c);
    row.push_back(detail::format_cell(it == r.semantic.end() ? std::nullopt : std::optional<double>(it->second), 2));
  }
  return detail::aligned_table(semantic_columns(), row);
}

inline std::string format_acoustic_table(const MetricReport& r) {
  std::vector<std::string> header = acoustic_columns();
  header.push_back("speaker_sim");
  std::vector<std::string> row;
  for (const auto& c : acoustic_columns()) {
    const auto it = r.acoustic.find(c);
    row.push_back(detail::format_cell(it == r.acoustic.end() ? std::nullopt : it->second, 3));
  }
  row.push_back(detail::format_cell(r.speaker_similarity, 3));
  return detail::aligned_table(header, row);
}

}  // namespace styletalk
