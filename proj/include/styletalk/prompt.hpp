#pragma once

// Audio-LLM prompt construction with style placeholders.
//
// Input styles are marked by <|extra_123|> (their embeddings are replaced by
// projected style vectors) and the response style is read from the single
// <|extra_124|>. Every placeholder position is recorded as a character
// offset together with the style it stands for.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"

namespace styletalk {

inline constexpr std::string_view kInputStyleToken = "<|extra_123|>";
inline constexpr std::string_view kOutputStyleToken = "<|extra_124|>";

enum class PromptVariant { full, no_style_context, no_audio_input, asr_plus_style };

inline const char* to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::full: return "full";
    case PromptVariant::no_style_context: return "no-style";
    case PromptVariant::no_audio_input: return "no-audio";
    case PromptVariant::asr_plus_style: return "asr-style";
  }
  return "full";
}

inline PromptVariant parse_prompt_variant(const std::string& s) {
  if (s == "full") return PromptVariant::full;
  if (s == "no-style" || s == "no_style_context") return PromptVariant::no_style_context;
  if (s == "no-audio" || s == "no_audio_input") return PromptVariant::no_audio_input;
  if (s == "asr-style" || s == "asr_plus_style") return PromptVariant::asr_plus_style;
  throw ArgumentError("unknown prompt variant '" + s + "'");
}

enum class SlotSource { reference, context, incoming };

inline const char* to_string(SlotSource s) {
  switch (s) {
    case SlotSource::reference: return "reference";
    case SlotSource::context: return "context";
    case SlotSource::incoming: return "incoming";
  }
  return "reference";
}

struct StyleSlot {
  std::size_t offset = 0;
  SlotSource source = SlotSource::reference;
  SpeakerId speaker;
  std::size_t entry_index = 0;  // context entry for SlotSource::context

  friend bool operator==(const StyleSlot&, const StyleSlot&) = default;
};

struct BuiltPrompt {
  std::string text;
  std::vector<StyleSlot> input_style_slots;
  std::size_t output_style_slot = 0;
  std::size_t token_count = 0;
};

using Tokenizer = std::function<std::size_t(std::string_view)>;

// Whitespace words, with every style placeholder counted as one token even
// when glued to punctuation.
inline std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  std::size_t i = 0;
  bool in_word = false;
  while (i < text.size()) {
    if (text.substr(i, kInputStyleToken.size()) == kInputStyleToken ||
        text.substr(i, kOutputStyleToken.size()) == kOutputStyleToken) {
      ++count;
      in_word = false;
      i += kInputStyleToken.size();
      continue;
    }
    const char c = text[i];
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++count;
    in_word = !space;
    ++i;
  }
  return count;
}

inline Tokenizer default_tokenizer() {
  return [](std::string_view s) { return count_tokens(s); };
}

inline std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) { return tokenizer(text); }

namespace detail {

class PromptWriter {
 public:
  void put(std::string_view s) { out_.text += s; }
  void input_style(SlotSource source, const SpeakerId& speaker, std::size_t entry = 0) {
    out_.input_style_slots.push_back({out_.text.size(), source, speaker, entry});
    out_.text += kInputStyleToken;
  }
  void output_style() {
    out_.output_style_slot = out_.text.size();
    out_.text += kOutputStyleToken;
  }
  BuiltPrompt finish(const Tokenizer& tokenizer) {
    out_.token_count = tokenizer(out_.text);
    return std::move(out_);
  }

 private:
  BuiltPrompt out_;
};

// Speakers named in the header: the incoming speaker, the response speaker,
// then other context speakers in order of first appearance.
inline std::vector<SpeakerId> header_speakers(const DialogCrop& crop, const ConversationContext& context) {
  std::vector<SpeakerId> out;
  auto add = [&](const SpeakerId& s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  add(crop.incoming_turn.speaker);
  add(crop.target_turn.speaker);
  for (const ContextEntry& e : context.entries) add(e.speaker);
  return out;
}

}  // namespace detail

// `context` holds the turns before the incoming one (already windowed).
inline BuiltPrompt build_prompt(const DialogCrop& crop, const ConversationContext& context,
                                PromptVariant variant, std::string_view audio_path,
                                const Tokenizer& tokenizer = default_tokenizer()) {
  const bool styles = variant != PromptVariant::no_style_context;
  const bool audio = variant != PromptVariant::no_audio_input;
  const bool incoming_line = variant == PromptVariant::no_audio_input || variant == PromptVariant::asr_plus_style;
  const SpeakerId& a = crop.incoming_turn.speaker;
  const SpeakerId& b = crop.target_turn.speaker;

  const std::vector<SpeakerId> header = detail::header_speakers(crop, context);
  for (const SpeakerId& s : header)
    if (!context.reference_styles.contains(s))
      throw ConfigError("build_prompt: missing reference style for speaker '" + s + "'");

  detail::PromptWriter w;
  if (audio) {
    w.put("Audio 1:<audio>");
    w.put(audio_path);
    w.put("</audio>\n\n");
  }
  w.put("This is the voice of the ");
  w.put(a);
  w.put(" last speaking. There is a conversation \namong ");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) w.put(" ");
    w.put(header[i]);
    w.put(":");
    if (styles) {
      w.put(" STYLE: ");
      w.input_style(SlotSource::reference, header[i]);
    }
  }
  w.put(". \nHere is some context: \n\n");

  auto turn_line = [&](const SpeakerId& speaker, std::string_view text, SlotSource source, std::size_t entry) {
    w.put(speaker);
    w.put(":");
    if (styles) {
      w.put(" STYLE: ");
      w.input_style(source, speaker, entry);
    }
    w.put(" TEXT: ");
    w.put(text);
    w.put("\n");
  };
  for (std::size_t i = 0; i < context.entries.size(); ++i)
    turn_line(context.entries[i].speaker, context.entries[i].text, SlotSource::context, i);
  if (incoming_line) turn_line(a, crop.incoming_turn.text, SlotSource::incoming, 0);

  w.put("\nTry to recognize what ");
  w.put(a);
  w.put(" just said from the audio, \nand generate the style and text of the next speaker ");
  w.put(b);
  w.put(". \nBe creative and avoid repeated words and sentences. \nSTYLE: ");
  w.output_style();
  w.put(" TEXT:");
  return w.finish(tokenizer);
}

// Drops whole turns, oldest first, until the built prompt fits the budget.
inline ConversationContext truncate_to_budget(const DialogCrop& crop, const ConversationContext& context,
                                              PromptVariant variant, std::string_view audio_path,
                                              std::size_t budget,
                                              const Tokenizer& tokenizer = default_tokenizer()) {
  ConversationContext trial;
  trial.reference_styles = context.reference_styles;
  const std::size_t n = context.entries.size();
  for (std::size_t drop = 0; drop <= n; ++drop) {
    trial.entries.assign(context.entries.begin() + static_cast<std::ptrdiff_t>(drop), context.entries.end());
    if (build_prompt(crop, trial, variant, audio_path, tokenizer).token_count <= budget) return trial;
  }
  throw BudgetError("truncate_to_budget: budget of " + std::to_string(budget) +
                    " tokens is smaller than the prompt scaffold");
}

}  // namespace styletalk
