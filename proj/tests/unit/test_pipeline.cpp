#include <gtest/gtest.h>

#include "styletalk/config.hpp"
#include "styletalk/corpus.hpp"
#include "styletalk/pipeline.hpp"
#include "support.hpp"

using namespace styletalk;

namespace {

struct Rig {
  std::vector<Conversation> convs = generate_synthetic_corpus(4, 11, true);
  CorpusRecognizer asr{corpus_transcripts(convs), 0.0, 0};
  DspStyleEncoder enc;
  ToyResponder responder{TextMode::oracle, StyleMode::oracle, oracle_targets(convs)};
  HarmonicSynthesizer tts;
  PipelineComponents comp{asr, enc, responder, tts};
  RunConfig cfg = load_config(support::source_dir() / "config/calibration.json");
};

}  // namespace

TEST(Pipeline, OracleReproducesCorpusTranscripts) {
  Rig rig;
  const auto crops = select_crops(rig.convs, 0, 3);
  const DialogRun run = run_dialog(Topology::style_talker, crops, rig.comp, rig.cfg.latencies_for(Topology::style_talker));
  ASSERT_EQ(run.turns.size(), crops.size());
  for (std::size_t i = 0; i < crops.size(); ++i) {
    EXPECT_EQ(run.turns[i].text, crops[i].target_turn.text);
    EXPECT_EQ(run.turns[i].asr_text, crops[i].target_turn.text);
    EXPECT_EQ(run.turns[i].speaker, crops[i].target_turn.speaker);
    EXPECT_EQ(run.turns[i].audio.samples().size(), crops[i].target_turn.audio->samples().size());
  }
}

TEST(Pipeline, ContextExcludesIncomingExceptCascade) {
  Rig rig;
  const DialogCrop crop = make_crop(rig.convs[0], 3);
  EXPECT_EQ(crop_context(crop, Topology::style_talker, rig.comp).entries.size(), 2u);
  EXPECT_EQ(crop_context(crop, Topology::e2e_speech, rig.comp).entries.size(), 2u);
  const auto cascade = crop_context(crop, Topology::cascade, rig.comp);
  ASSERT_EQ(cascade.entries.size(), 3u);
  EXPECT_EQ(cascade.entries[2].text, crop.incoming_turn.text);
  EXPECT_TRUE(cascade.reference_styles.contains(crop.target_turn.speaker));
}

TEST(Pipeline, Deterministic) {
  Rig rig;
  const auto crops = select_crops(rig.convs, 2, 9);
  const auto& lat = rig.cfg.latencies_for(Topology::cascade);
  const DialogRun a = run_dialog(Topology::cascade, crops, rig.comp, lat);
  const DialogRun b = run_dialog(Topology::cascade, crops, rig.comp, lat);
  EXPECT_EQ(a.reports, b.reports);
  for (std::size_t i = 0; i < a.turns.size(); ++i) EXPECT_EQ(a.turns[i].audio, b.turns[i].audio);
}

TEST(Pipeline, CarryoverOnlyWithinConversation) {
  Rig rig;
  LatencyMap lat = rig.cfg.latencies_for(Topology::style_talker);
  lat["asr"] = {30.0, 0, 0, 0, false};
  std::vector<DialogCrop> crops{make_crop(rig.convs[0], 1), make_crop(rig.convs[0], 2), make_crop(rig.convs[1], 1)};
  const DialogRun run = run_dialog(Topology::style_talker, crops, rig.comp, lat);
  EXPECT_GT(run.reports[0].carryover_s, 0.0);
  EXPECT_EQ(run.reports[1].timeline.front().start_s, run.reports[0].carryover_s);
  EXPECT_EQ(run.reports[2].timeline.front().start_s, 0.0);
}

TEST(Pipeline, FailuresNameTheTurn) {
  Rig rig;
  DialogCrop crop = make_crop(rig.convs[0], 1);
  crop.incoming_turn.audio.reset();
  try {
    run_dialog(Topology::style_talker, {make_crop(rig.convs[0], 1), crop}, rig.comp,
               rig.cfg.latencies_for(Topology::style_talker));
    FAIL() << "expected TurnError";
  } catch (const TurnError& e) {
    EXPECT_EQ(e.turn_index(), 1u);
  }
}

TEST(Pipeline, PromptAudioPathFallback) {
  Rig rig;
  EXPECT_EQ(prompt_audio_path(make_crop(rig.convs[0], 2)), rig.convs[0].id + "_2.wav");
}

TEST(Config, RoundTripAndErrors) {
  const RunConfig c = load_config(support::source_dir() / "config/calibration.json");
  const RunConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"latencies":{"cascade":{"asr":{"bogus":1}}}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"latencies":{"ring":{}}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"components":{"text":"gpt"}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"lambda":-1})")), ConfigError);
  EXPECT_THROW(load_config(support::source_dir() / "config/missing.json"), ConfigError);
  EXPECT_THROW(RunConfig{}.latencies_for(Topology::cascade), ConfigError);
}
