#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "styletalk/corpus.hpp"
#include "styletalk/wav.hpp"
#include "support.hpp"

using namespace styletalk;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

Conversation text_conv(const std::string& id, std::vector<std::string> texts) {
  Conversation c{id, {}, Split::train};
  for (std::size_t i = 0; i < texts.size(); ++i) c.turns.push_back({i % 2 ? "B" : "A", texts[i], {}, {}, {}, {}});
  return c;
}

}  // namespace

TEST(Wav, RoundTripWithinQuantization) {
  const AudioClip a = support::sine_plus_noise(200.0, 0.4, 0.1, 1, 0.2);
  const AudioClip b = decode_wav(encode_wav(a), "id");
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(b.sample_rate(), a.sample_rate());
  EXPECT_EQ(*b.source_id(), "id");
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.samples()[i], b.samples()[i], 1.0 / 32767.0);
  EXPECT_EQ(encode_wav(b), encode_wav(decode_wav(encode_wav(b))));
  EXPECT_THROW(decode_wav("RIFF1234"), Error);
}

TEST(Load, RejectsCarryLineNumbers) {
  const fs::path dir = support::scratch_dir("corpus_load");
  write_text(dir / "c.jsonl",
             R"({"id":"ok","split":"train","turns":[{"speaker":"A","text":"hi"},{"speaker":"B","text":"yo"}]})" "\n"
             "not json\n"
             "\n"
             R"({"id":"short","split":"train","turns":[{"speaker":"A","text":"hi"}]})" "\n"
             R"({"id":"ok","split":"train","turns":[{"speaker":"A","text":"hi"},{"speaker":"B","text":"yo"}]})" "\n");
  const LoadResult r = load_corpus(dir / "c.jsonl", false);
  ASSERT_EQ(r.conversations.size(), 1u);
  ASSERT_EQ(r.rejects.size(), 3u);
  EXPECT_EQ(r.rejects[0].line, 2u);
  EXPECT_EQ(r.rejects[1].line, 4u);
  EXPECT_EQ(r.rejects[2].line, 5u);
  write_text(dir / "bad.jsonl", "nope\n");
  EXPECT_THROW(load_corpus(dir / "bad.jsonl"), ConfigError);
  EXPECT_THROW(load_corpus(dir / "missing.jsonl"), IoError);
}

TEST(Load, SaveRoundTrip) {
  const fs::path dir = support::scratch_dir("corpus_save");
  const auto convs = generate_synthetic_corpus(4, 3, false);
  save_corpus(dir / "c.jsonl", convs);
  const auto back = load_corpus(dir / "c.jsonl", false).conversations;
  ASSERT_EQ(back.size(), convs.size());
  for (std::size_t i = 0; i < convs.size(); ++i) {
    EXPECT_EQ(back[i].id, convs[i].id);
    EXPECT_EQ(back[i].split, convs[i].split);
    ASSERT_EQ(back[i].turns.size(), convs[i].turns.size());
    for (std::size_t t = 0; t < convs[i].turns.size(); ++t) {
      EXPECT_EQ(back[i].turns[t].text, convs[i].turns[t].text);
      EXPECT_EQ(back[i].turns[t].synth, convs[i].turns[t].synth);
    }
  }
}

TEST(Diarization, DiscardsMultipleDistinctIndicators) {
  EXPECT_EQ(filter_diarization("[S1] hello [S2] hi"), DiarizationVerdict::discard);
  EXPECT_EQ(filter_diarization("[S1] hello [S1] again"), DiarizationVerdict::keep);
  EXPECT_EQ(filter_diarization("plain"), DiarizationVerdict::keep);
  bool stripped = false;
  EXPECT_EQ(strip_leading_indicator("  [S3] words", &stripped), "words");
  EXPECT_TRUE(stripped);
  EXPECT_EQ(strip_leading_indicator("words [S3]", &stripped), "words [S3]");
  EXPECT_FALSE(stripped);
}

TEST(Diarization, FilterIsIdempotent) {
  const std::vector<Conversation> in{text_conv("a", {"[S1] x", "[S1] y [S2] z", "w", "v"}),
                                     text_conv("b", {"[S1] one [S2] two", "three"})};
  IngestOptions opt;
  IngestReport r1, r2;
  const auto once = ingest(in, opt, r1);
  const auto twice = ingest(once, opt, r2);
  EXPECT_EQ(once, twice);
  EXPECT_EQ(r1.discarded_multi_speaker, 2u);
  EXPECT_EQ(r1.stripped_indicators, 1u);
  EXPECT_EQ(r1.dropped_short_conversations, 1u);
  EXPECT_EQ(r1.conversations_out, 1u);
  EXPECT_EQ(r2.discarded_multi_speaker, 0u);
}

TEST(Ingest, NormalizeText) {
  IngestOptions opt;
  opt.normalize_text = true;
  IngestReport r;
  const auto out = ingest({text_conv("a", {"Um, Hello there!", "Uh yes."})}, opt, r);
  EXPECT_EQ(out.at(0).turns[0].text, "hello there");
  EXPECT_EQ(out.at(0).turns[1].text, "yes");
}

TEST(Splits, SizesAndPartition) {
  EXPECT_EQ(split_sizes(20, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{16, 2, 2}));
  EXPECT_EQ(split_sizes(3, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{1, 1, 1}));
  EXPECT_THROW(split_sizes(2, {0.8, 0.1, 0.1}), ArgumentError);
  EXPECT_THROW(split_sizes(10, {0.5, 0.1, 0.1}), ArgumentError);
  for (std::size_t n = 3; n < 40; ++n) {
    std::vector<Conversation> convs;
    for (std::size_t i = 0; i < n; ++i) convs.push_back(text_conv("c" + std::to_string(i), {"a", "b"}));
    const auto out = split_corpus(convs, {0.7, 0.2, 0.1}, n);
    ASSERT_EQ(out.size(), n);
    std::array<std::size_t, 3> counts{};
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(out[i].id, convs[i].id);
      ++counts[static_cast<std::size_t>(out[i].split)];
    }
    EXPECT_EQ(counts, split_sizes(n, {0.7, 0.2, 0.1}));
    EXPECT_EQ(out, split_corpus(convs, {0.7, 0.2, 0.1}, n));
  }
}

TEST(Synthetic, DeterministicAndValid) {
  const auto a = generate_synthetic_corpus(6, 42, false);
  EXPECT_EQ(a, generate_synthetic_corpus(6, 42, false));
  for (const Conversation& c : a) {
    EXPECT_GE(c.turns.size(), 4u);
    EXPECT_LE(c.turns.size(), 8u);
    for (const Turn& t : c.turns) {
      EXPECT_FALSE(t.text.empty());
      ASSERT_TRUE(t.synth.has_value());
      EXPECT_EQ(t.synth->prosodic.kind(), StyleKind::prosodic);
      EXPECT_EQ(t.synth->acoustic.kind(), StyleKind::acoustic);
    }
  }
}

TEST(Synthetic, AudioMatchesStyleForEveryTurn) {
  const auto convs = generate_synthetic_corpus(3, 5, true);
  for (const Conversation& c : convs) {
    for (std::size_t i = 0; i < c.turns.size(); ++i) {
      const Turn& t = c.turns[i];
      ASSERT_TRUE(t.audio.has_value());
      EXPECT_EQ(*t.audio->source_id(), turn_source_id(c.id, i));
      const StyleVector e = encode_style(*t.audio);
      for (std::size_t k : controllable::components) EXPECT_NEAR(e[k], t.synth->prosodic[k], 0.08) << c.id << " " << i;
      EXPECT_NEAR(t.audio->duration_seconds(),
                  static_cast<double>(split_words(t.text).size()) / (t.synth->prosodic[5] * style_scale::max_rate), 1e-3);
    }
  }
}

TEST(Synthetic, BundledCorpusLoads) {
  const LoadResult r = load_corpus(support::source_dir() / "data/synthetic/corpus.jsonl", false);
  EXPECT_EQ(r.conversations.size(), 20u);
  EXPECT_TRUE(r.rejects.empty());
  std::set<std::string> ids;
  for (const auto& c : r.conversations) ids.insert(c.id);
  EXPECT_EQ(ids.size(), 20u);
}
