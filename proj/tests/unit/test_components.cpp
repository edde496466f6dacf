#include <gtest/gtest.h>

#include <random>

#include "styletalk/components.hpp"
#include "styletalk/features.hpp"
#include "styletalk/metrics.hpp"

using namespace styletalk;

namespace {

AudioClip tagged(const std::string& id, double seconds = 1.0) {
  return AudioClip(16000, std::vector<double>(static_cast<std::size_t>(seconds * 16000), 0.0), id);
}

StyleVector flat(double v) { return StyleVector(std::vector<double>(kStyleDim, v)); }

}  // namespace

TEST(LatencyModel, EvaluateIsAffine) {
  const LatencyModel m{0.5, 0.1, 0.02, 0.3, false};
  EXPECT_DOUBLE_EQ(m.evaluate(10.0, 30.0, 4.0), 0.5 + 1.0 + 0.6 + 1.2);
  EXPECT_DOUBLE_EQ(m.first_chunk(10.0, 30.0, 4.0), m.evaluate(10.0, 30.0, 4.0));
  const LatencyModel s{0.5, 0.1, 0.02, 0.3, true};
  EXPECT_DOUBLE_EQ(s.first_chunk(10.0, 30.0, 4.0), 0.5 + 1.0 + 0.6);
  EXPECT_THROW((LatencyModel{-1.0}).validate(), ConfigError);
}

TEST(Recognizer, ReturnsTranscriptAtZeroWer) {
  const CorpusRecognizer asr({{"c#1", "hello there friend"}}, 0.0, 1);
  EXPECT_EQ(asr.recognize(tagged("c#1")).text, "hello there friend");
  EXPECT_THROW(asr.recognize(tagged("c#9")), LookupError);
  EXPECT_THROW(asr.recognize(AudioClip(16000, {0.0})), LookupError);
}

TEST(Recognizer, HitsTargetWerExactly) {
  const std::string ref = "one two three four five six seven eight nine ten";
  for (double target : {0.1, 0.3, 0.5, 1.0}) {
    const CorpusRecognizer asr({{"x", ref}}, target, 7);
    EXPECT_NEAR(wer(ref, asr.recognize(tagged("x")).text), target, 1e-12) << target;
  }
  EXPECT_THROW(CorpusRecognizer({}, 1.5, 0), ArgumentError);
}

TEST(Latency, ComponentsReportTheirModel) {
  const LatencyModel m{0.25, 0.125, 0.0625, 0.5, false};
  const AudioClip clip = tagged("a", 2.0);
  EXPECT_EQ(CorpusRecognizer({{"a", "x y"}}, 0.0, 0, m).recognize(clip).latency_s, m.evaluate(2.0, 0.0, 0.0));
  EXPECT_EQ(DspStyleEncoder(m).latency(clip), m.evaluate(2.0, 0.0, 0.0));
  const ToyResponder r(TextMode::oracle, StyleMode::oracle, {{"a", {"four words right here", flat(0.2)}}}, std::nullopt, m);
  EXPECT_EQ(r.respond(clip, {}, "B", 0).latency_s, m.evaluate(2.0, 4.0, 0.0));
  const HarmonicSynthesizer tts(m);
  const AudioClip out = tts.synthesize("a b c", flat(0.2), StyleVector::zeros(StyleKind::acoustic));
  EXPECT_EQ(tts.latency("a b c", out), m.evaluate(0.0, 3.0, out.duration_seconds()));
}

TEST(Bigram, RowsSumToOne) {
  BigramTable t;
  t.add_sentence({"a", "b", "a"});
  t.add_sentence({"b", "c"});
  EXPECT_EQ(t.vocab_size(), 4u);
  for (const std::string prev : {"<s>", "a", "b", "c", "unseen"}) {
    double sum = 0.0;
    for (const auto& o : t.outcomes()) sum += t.probability(prev, o);
    EXPECT_NEAR(sum, 1.0, 1e-12) << prev;
  }
  EXPECT_DOUBLE_EQ(t.probability("a", "b"), (1.0 + 1.0) / (2.0 + 4.0));
  EXPECT_EQ(t.probability("a", "zzz"), 0.0);
}

TEST(Bigram, SampleIsDeterministic) {
  BigramTable t;
  t.add_sentence({"x", "y", "z"});
  EXPECT_EQ(t.sample(5), t.sample(5));
  EXPECT_THROW(BigramTable().sample(0), StateError);
}

TEST(Bigram, TrainsOnTrainSplitOnly) {
  Conversation a{"a", {{"A", "alpha beta", {}, {}, {}, {}}, {"B", "gamma", {}, {}, {}, {}}}, Split::train};
  Conversation b{"b", {{"A", "delta", {}, {}, {}, {}}, {"B", "epsilon", {}, {}, {}, {}}}, Split::test};
  const BigramTable t = train_markov({a, b});
  EXPECT_TRUE(t.outcomes().contains("alpha"));
  EXPECT_FALSE(t.outcomes().contains("delta"));
}

TEST(Responder, OracleReturnsTarget) {
  const ToyResponder r(TextMode::oracle, StyleMode::oracle, {{"c#1", {"yes indeed", flat(0.3)}}});
  const auto out = r.respond(tagged("c#1"), {}, "B", 0);
  EXPECT_EQ(out.text, "yes indeed");
  EXPECT_EQ(out.prosodic_style, flat(0.3));
  EXPECT_THROW(r.respond(tagged("nope"), {}, "B", 0), LookupError);
}

TEST(Responder, ContextAverageAndLastSameSpeaker) {
  ConversationContext ctx;
  ctx = append_turn(ctx, "A", "x", flat(0.2));
  ctx = append_turn(ctx, "B", "y", flat(0.4));
  ctx = append_turn(ctx, "A", "z", flat(0.6));
  const ToyResponder avg(TextMode::oracle, StyleMode::context_average, {{"q", {"t", flat(0.0)}}});
  EXPECT_NEAR(avg.respond(tagged("q"), ctx, "B", 0).prosodic_style[3], 0.4, 1e-12);
  const ToyResponder last(TextMode::oracle, StyleMode::last_same_speaker, {{"q", {"t", flat(0.0)}}});
  EXPECT_EQ(last.respond(tagged("q"), ctx, "A", 0).prosodic_style, flat(0.6));
  EXPECT_THROW(context_average_style({}, "A"), ConfigError);
}

TEST(Responder, MarkovNeedsTable) {
  const ToyResponder r(TextMode::markov, StyleMode::oracle, {{"q", {"t", flat(0.0)}}});
  EXPECT_THROW(r.respond(tagged("q"), {}, "B", 0), StateError);
}

TEST(Synth, KindAndTextChecks) {
  const HarmonicSynthesizer tts;
  const StyleVector ac = StyleVector::zeros(StyleKind::acoustic);
  EXPECT_THROW(tts.synthesize("hi", ac, ac), KindMismatchError);
  EXPECT_THROW(tts.synthesize("hi", flat(0.2), flat(0.2)), KindMismatchError);
  EXPECT_THROW(tts.synthesize("   ", flat(0.2), ac), ArgumentError);
}

TEST(Synth, DeterministicAndDurationFollowsRate) {
  const HarmonicSynthesizer tts;
  ProsodyControls c;
  c.rate = 4.0;
  const StyleVector s = make_prosodic_style(c);
  const AudioClip a = tts.synthesize("one two three four five six seven eight", s, StyleVector::zeros(StyleKind::acoustic));
  EXPECT_EQ(a, tts.synthesize("one two three four five six seven eight", s, StyleVector::zeros(StyleKind::acoustic)));
  EXPECT_NEAR(a.duration_seconds(), 2.0, 1e-3);
}

TEST(Synth, RoundTripSample) {
  namespace cr = controllable;
  const HarmonicSynthesizer tts;
  std::mt19937_64 rng(21);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int i = 0; i < 10; ++i) {
    const ProsodyControls c{u(cr::pitch_min_hz, cr::pitch_max_hz), u(cr::pitch_std_min_hz, cr::pitch_std_max_hz),
                            u(cr::energy_min, cr::energy_max), u(cr::hnr_min_db, cr::hnr_max_db),
                            u(cr::rate_min, cr::rate_max)};
    const StyleVector s = make_prosodic_style(c);
    const StyleVector e = encode_style(tts.synthesize("we walked along the river and talked about plans", s,
                                                      default_acoustic_style()));
    for (std::size_t k : cr::components) EXPECT_NEAR(e[k], s[k], 0.08) << "component " << k;
  }
}

TEST(Fnv, KnownValue) { EXPECT_EQ(fnv1a(""), 1469598103934665603ULL); }
