#pragma once

// End-to-end dialog runs over crops: context assembly, prompt construction,
// response generation, synthesis and per-turn timing.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "styletalk/components.hpp"
#include "styletalk/corpus.hpp"
#include "styletalk/dialog.hpp"
#include "styletalk/error.hpp"
#include "styletalk/features.hpp"
#include "styletalk/prompt.hpp"
#include "styletalk/scheduler.hpp"

namespace styletalk {

class TurnError : public Error {
 public:
  TurnError(std::size_t turn_index, const std::string& crop_id, const std::string& what)
      : Error("turn " + std::to_string(turn_index) + " (" + crop_id + "): " + what), turn_index_(turn_index) {}
  std::size_t turn_index() const { return turn_index_; }

 private:
  std::size_t turn_index_;
};

struct PipelineComponents {
  const Recognizer& recognizer;
  const StyleEncoder& encoder;
  const StyleResponder& responder;
  const Synthesizer& synthesizer;
};

struct DialogOptions {
  std::size_t context_window = 3;
  std::size_t token_budget = 1536;
  PromptVariant variant = PromptVariant::full;
  double tokens_per_output_second = 3.0;
  double units_per_output_second = 50.0;
  double output_asr_wer = 0.0;  // substitution rate when recognizing generated speech
  std::uint64_t seed = 0;
};

struct GeneratedTurn {
  std::string crop_id;
  SpeakerId speaker;
  std::string text;
  std::string asr_text;
  StyleVector style;
  AudioClip audio;
  std::size_t prompt_tokens = 0;
};

struct DialogRun {
  std::vector<GeneratedTurn> turns;
  std::vector<SimReport> reports;
};

// Ground-truth text and synthesis style of the turn following each turn,
// keyed by the source id of that turn's audio.
inline std::map<std::string, OracleTarget> oracle_targets(const std::vector<Conversation>& convs) {
  std::map<std::string, OracleTarget> out;
  for (const Conversation& c : convs) {
    for (std::size_t i = 0; i + 1 < c.turns.size(); ++i) {
      const Turn& next = c.turns[i + 1];
      std::optional<StyleVector> style;
      if (next.synth) style = next.synth->prosodic;
      else if (next.prosodic_style) style = next.prosodic_style;
      else if (next.audio) style = encode_style(*next.audio);
      if (!style) continue;
      out[turn_source_id(c.id, i)] = {next.text, *style};
    }
  }
  return out;
}

inline std::map<std::string, std::string> corpus_transcripts(const std::vector<Conversation>& convs) {
  std::map<std::string, std::string> out;
  for (const Conversation& c : convs)
    for (std::size_t i = 0; i < c.turns.size(); ++i) out[turn_source_id(c.id, i)] = c.turns[i].text;
  return out;
}

// One crop per conversation at a seeded position; `limit` 0 keeps all.
inline std::vector<DialogCrop> select_crops(const std::vector<Conversation>& convs, std::size_t limit,
                                            std::uint64_t seed) {
  std::vector<DialogCrop> out;
  for (const Conversation& c : convs) {
    if (limit && out.size() >= limit) break;
    out.push_back(make_crop(c, sample_crop_index(c, fnv1a(c.id, seed))));
  }
  return out;
}

inline StyleVector turn_style(const Turn& t, const StyleEncoder& encoder) {
  if (t.prosodic_style) return *t.prosodic_style;
  if (!t.audio) throw StateError("turn of '" + t.speaker + "' has neither a style nor audio");
  return encoder.encode(*t.audio);
}

inline StyleVector turn_timbre(const Turn& t) {
  if (t.synth) return t.synth->acoustic;
  if (!t.audio) throw StateError("turn of '" + t.speaker + "' has no audio for timbre estimation");
  return estimate_acoustic_style(*t.audio);
}

// Each speaker's reference is their first context turn, or the target turn
// for a speaker who only appears there.
inline std::map<SpeakerId, ReferenceStyle> crop_reference_styles(const DialogCrop& crop, const StyleEncoder& encoder) {
  std::map<SpeakerId, ReferenceStyle> out;
  for (const Turn& t : crop.context_turns)
    if (!out.contains(t.speaker)) out[t.speaker] = {turn_style(t, encoder), turn_timbre(t)};
  if (!out.contains(crop.target_turn.speaker))
    out[crop.target_turn.speaker] = {turn_style(crop.target_turn, encoder), turn_timbre(crop.target_turn)};
  return out;
}

inline std::string prompt_audio_path(const DialogCrop& crop) {
  if (crop.incoming_turn.audio_path) return *crop.incoming_turn.audio_path;
  std::string s = crop.conversation_id + "_" + std::to_string(crop.k);
  return s + ".wav";
}

// Context visible to the responder. The style-talker and end-to-end
// topologies hear the incoming turn as audio only; the cascade appends its
// recognized text and style.
inline ConversationContext crop_context(const DialogCrop& crop, Topology topology, const PipelineComponents& comp) {
  ConversationContext ctx;
  ctx.reference_styles = crop_reference_styles(crop, comp.encoder);
  const std::size_t upto = topology == Topology::cascade ? crop.context_turns.size() : crop.context_turns.size() - 1;
  for (std::size_t i = 0; i < upto; ++i) {
    const Turn& t = crop.context_turns[i];
    if (!t.audio) throw StateError("context turn " + std::to_string(i + 1) + " has no audio");
    ctx = append_turn(ctx, t.speaker, comp.recognizer.recognize(*t.audio).text, comp.encoder.encode(*t.audio));
  }
  return ctx;
}

// Carryover chains between consecutive crops of the same conversation.
inline DialogRun run_dialog(Topology topology, const std::vector<DialogCrop>& crops, const PipelineComponents& comp,
                            const LatencyMap& latencies, const DialogOptions& opt = {}) {
  DialogRun run;
  double carry = 0.0;
  std::string prev_conv;
  for (std::size_t n = 0; n < crops.size(); ++n) {
    const DialogCrop& crop = crops[n];
    try {
      if (!crop.incoming_turn.audio) throw StateError("incoming turn has no audio");
      const AudioClip& incoming = *crop.incoming_turn.audio;
      if (crop.conversation_id != prev_conv) carry = 0.0;
      prev_conv = crop.conversation_id;

      const ConversationContext full = crop_context(crop, topology, comp);
      const std::string audio_path = prompt_audio_path(crop);
      const ConversationContext ctx =
          truncate_to_budget(crop, window(full, opt.context_window), opt.variant, audio_path, opt.token_budget);
      const BuiltPrompt prompt = build_prompt(crop, ctx, opt.variant, audio_path);

      const SpeakerId& speaker = crop.target_turn.speaker;
      const ResponderOutput resp = comp.responder.respond(incoming, ctx, speaker, fnv1a(crop.id(), opt.seed));
      const AudioClip audio = comp.synthesizer
                                  .synthesize(resp.text, resp.prosodic_style, ctx.reference_styles.at(speaker).acoustic)
                                  .with_source_id("gen:" + crop.id());
      const CorpusRecognizer out_asr({{"gen:" + crop.id(), resp.text}}, opt.output_asr_wer, opt.seed);

      GeneratedTurn g;
      g.crop_id = crop.id();
      g.speaker = speaker;
      g.text = resp.text;
      g.asr_text = out_asr.recognize(audio).text;
      g.style = resp.prosodic_style;
      g.audio = audio;
      g.prompt_tokens = prompt.token_count;

      SimOptions so;
      so.units_per_output_second = opt.units_per_output_second;
      so.turn_index = n;
      const double out_dur = audio.duration_seconds();
      SimReport rep = simulate_turn(topology, incoming.duration_seconds(), opt.tokens_per_output_second * out_dur,
                                    out_dur, latencies, carry, so);
      carry = rep.carryover_s;
      run.turns.push_back(std::move(g));
      run.reports.push_back(std::move(rep));
    } catch (const TurnError&) {
      throw;
    } catch (const std::exception& e) {
      throw TurnError(n, crop.id(), e.what());
    }
  }
  return run;
}

}  // namespace styletalk
