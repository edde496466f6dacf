#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "styletalk/corpus.hpp"
#include "styletalk/pipeline.hpp"
#include "styletalk/prompt.hpp"
#include "support.hpp"

using namespace styletalk;

namespace {

std::size_t count_of(const std::string& s, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

struct Fixture {
  DialogCrop crop;
  ConversationContext context;
};

Fixture fixture(std::size_t k = 3, Topology topology = Topology::style_talker) {
  const auto convs = load_corpus(support::source_dir() / "tests/fixtures/prompt_fixture.jsonl").conversations;
  const CorpusRecognizer asr(corpus_transcripts(convs), 0.0, 0);
  const DspStyleEncoder enc;
  const ToyResponder resp(TextMode::oracle, StyleMode::oracle, oracle_targets(convs));
  const HarmonicSynthesizer tts;
  const PipelineComponents comp{asr, enc, resp, tts};
  Fixture f;
  f.crop = make_crop(convs.at(0), k);
  f.context = crop_context(f.crop, topology, comp);
  return f;
}

const PromptVariant kVariants[] = {PromptVariant::full, PromptVariant::no_style_context,
                                   PromptVariant::no_audio_input, PromptVariant::asr_plus_style};

}  // namespace

TEST(Prompt, SlotsMatchPlaceholders) {
  for (std::size_t k = 1; k <= 3; ++k) {
    const Fixture f = fixture(k);
    for (PromptVariant v : kVariants) {
      const BuiltPrompt p = build_prompt(f.crop, f.context, v, "x.wav");
      EXPECT_EQ(p.input_style_slots.size(), count_of(p.text, kInputStyleToken)) << to_string(v);
      EXPECT_EQ(count_of(p.text, kOutputStyleToken), 1u);
      for (const StyleSlot& s : p.input_style_slots) EXPECT_EQ(p.text.compare(s.offset, kInputStyleToken.size(), kInputStyleToken), 0);
      EXPECT_EQ(p.text.compare(p.output_style_slot, kOutputStyleToken.size(), kOutputStyleToken), 0);
    }
  }
}

TEST(Prompt, VariantsDifferAsDocumented) {
  const Fixture f = fixture();
  const std::string full = build_prompt(f.crop, f.context, PromptVariant::full, "a.wav").text;
  const std::string asr = build_prompt(f.crop, f.context, PromptVariant::asr_plus_style, "a.wav").text;
  const std::string noaudio = build_prompt(f.crop, f.context, PromptVariant::no_audio_input, "a.wav").text;
  const std::string incoming = "Ann: STYLE: <|extra_123|> TEXT: Did you see the lake?\n";
  const std::string marker = "\n\nTry to recognize";
  std::string expected_asr = full;
  expected_asr.insert(full.find(marker) + 1, incoming);
  EXPECT_EQ(asr, expected_asr);
  EXPECT_EQ(noaudio, asr.substr(std::string("Audio 1:<audio>a.wav</audio>\n\n").size()));
}

TEST(Prompt, NoStyleHasOnlyOutputSlot) {
  const Fixture f = fixture();
  const BuiltPrompt p = build_prompt(f.crop, f.context, PromptVariant::no_style_context, "a.wav");
  EXPECT_TRUE(p.input_style_slots.empty());
  EXPECT_EQ(count_of(p.text, kInputStyleToken), 0u);
}

TEST(Prompt, SlotSources) {
  const Fixture f = fixture();
  const BuiltPrompt p = build_prompt(f.crop, f.context, PromptVariant::asr_plus_style, "a.wav");
  std::map<SlotSource, int> n;
  for (const auto& s : p.input_style_slots) ++n[s.source];
  EXPECT_EQ(n[SlotSource::reference], 2);
  EXPECT_EQ(n[SlotSource::context], 2);
  EXPECT_EQ(n[SlotSource::incoming], 1);
}

TEST(Prompt, TokenCountUsesPlaceholderAsOneToken) {
  EXPECT_EQ(count_tokens("a b c"), 3u);
  EXPECT_EQ(count_tokens("x:<|extra_123|>."), count_tokens("x: <|extra_123|> ."));
}

TEST(Prompt, TruncationIsIdempotentAndFits) {
  Fixture f = fixture();
  for (int i = 0; i < 10; ++i) f.context = append_turn(f.context, "Bob", "more words in a long context turn", f.context.entries[0].style);
  const std::size_t full_tokens = build_prompt(f.crop, f.context, PromptVariant::full, "a.wav").token_count;
  for (std::size_t budget = full_tokens; budget > 60; budget -= 7) {
    const auto once = truncate_to_budget(f.crop, f.context, PromptVariant::full, "a.wav", budget);
    EXPECT_EQ(truncate_to_budget(f.crop, once, PromptVariant::full, "a.wav", budget), once);
    EXPECT_LE(build_prompt(f.crop, once, PromptVariant::full, "a.wav").token_count, budget);
  }
  EXPECT_THROW(truncate_to_budget(f.crop, f.context, PromptVariant::full, "a.wav", 5), BudgetError);
}

TEST(Prompt, TruncationDropsOldestFirst) {
  Fixture f = fixture();
  const auto t = truncate_to_budget(f.crop, f.context, PromptVariant::full, "a.wav",
                                    build_prompt(f.crop, f.context, PromptVariant::full, "a.wav").token_count - 1);
  ASSERT_EQ(t.entries.size(), 1u);
  EXPECT_EQ(t.entries[0], f.context.entries[1]);
}

TEST(Prompt, VariantNames) {
  for (PromptVariant v : kVariants) EXPECT_EQ(parse_prompt_variant(to_string(v)), v);
  EXPECT_THROW(parse_prompt_variant("audio-only"), ArgumentError);
}
