#pragma once

// The styletalk command: subcommands for corpus preparation, latency
// simulation, dialog runs, evaluation, gradient checks and prompt dumps.
// Exit codes: 0 success, 1 check failure, 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "styletalk/components.hpp"
#include "styletalk/config.hpp"
#include "styletalk/corpus.hpp"
#include "styletalk/gradcheck.hpp"
#include "styletalk/metrics.hpp"
#include "styletalk/pipeline.hpp"
#include "styletalk/prompt.hpp"
#include "styletalk/scheduler.hpp"
#include "styletalk/wav.hpp"

namespace styletalk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;

inline std::string file_stem_of(std::string id) {
  for (char& c : id)
    if (c == ':' || c == '/' || c == '\\' || c == '#') c = '_';
  return id;
}

inline std::string fixed(double v, int p) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(p) << v;
  return os.str();
}

inline void write_json(const fs::path& path, const json& j) { detail::write_file_atomic(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::size_t n = 20;
  std::uint64_t seed = 7;
  std::string out;
};

inline int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto convs = generate_synthetic_corpus(a.n, a.seed, false);
  save_corpus(a.out, convs);
  std::size_t turns = 0;
  for (const auto& c : convs) turns += c.turns.size();
  out << json{{"conversations", convs.size()}, {"turns", turns}, {"seed", a.seed}, {"out", a.out}}.dump() << "\n";
  return kOk;
}

struct IngestArgs {
  std::string corpus;
  std::string out;
  bool filter = false;
  bool normalize_text = false;
  std::vector<double> split;
  std::uint64_t seed = 0;
};

inline int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const LoadResult loaded = load_corpus(a.corpus, false);
  IngestOptions opt;
  opt.filter_diarization = a.filter;
  opt.normalize_text = a.normalize_text;
  IngestReport rep;
  std::vector<Conversation> convs = ingest(loaded.conversations, opt, rep);
  if (!a.split.empty()) {
    if (a.split.size() != 3) throw ArgumentError("--split takes three ratios");
    convs = split_corpus(std::move(convs), {a.split[0], a.split[1], a.split[2]}, a.seed);
  }
  if (convs.empty()) throw ConfigError("ingest: no conversations left after filtering");
  save_corpus(a.out, convs, corpus_root(a.corpus));

  json rejects = json::array();
  for (const auto& r : loaded.rejects) rejects.push_back({{"line", r.line}, {"message", r.message}});
  const json record{{"conversations_in", rep.conversations_in},
                    {"conversations_out", rep.conversations_out},
                    {"turns_in", rep.turns_in},
                    {"turns_out", rep.turns_out},
                    {"rejects", rejects},
                    {"discarded_multi_speaker", rep.discarded_multi_speaker},
                    {"stripped_leading_indicator", rep.stripped_indicators},
                    {"dropped_short_conversations", rep.dropped_short_conversations}};
  out << record.dump() << "\n";
  out << "rejects  discarded_multi_speaker  stripped_leading_indicator  conversations_out\n"
      << std::setw(7) << loaded.rejects.size() << "  " << std::setw(23) << rep.discarded_multi_speaker << "  "
      << std::setw(26) << rep.stripped_indicators << "  " << std::setw(17) << rep.conversations_out << "\n";
  for (const auto& r : loaded.rejects) out << "reject line " << r.line << ": " << r.message << "\n";
  return kOk;
}

struct SimulateArgs {
  std::string topology = "style-talker";
  std::string config;
  double input_dur = 10.0;
  double output_dur = 10.0;
  double prev_carryover = 0.0;
};

inline json sim_to_json(const SimReport& r) {
  json events = json::array();
  for (const auto& e : r.timeline)
    events.push_back({{"stage", e.stage},
                      {"start_s", e.start_s},
                      {"end_s", e.end_s},
                      {"turn_index", e.turn_index},
                      {"lane", to_string(e.lane)}});
  return {{"rtf", r.rtf},
          {"delay_s", r.delay_s},
          {"generation_s", r.generation_s},
          {"playback_start_s", r.playback_start_s},
          {"playback_end_s", r.playback_end_s},
          {"carryover_s", r.carryover_s},
          {"timeline", events}};
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const Topology t = parse_topology(a.topology);
  const RunConfig cfg = load_config(a.config);
  SimOptions so;
  so.units_per_output_second = cfg.units_per_output_second;
  const SimReport r = simulate_turn(t, a.input_dur, cfg.tokens_per_output_second * a.output_dur, a.output_dur,
                                    cfg.latencies_for(t), a.prev_carryover, so);
  json rec = sim_to_json(r);
  rec["topology"] = to_string(t);
  rec["input_dur_s"] = a.input_dur;
  rec["output_dur_s"] = a.output_dur;
  out << rec.dump() << "\n";
  out << "topology      RTF     delay_s  carryover_s\n";
  out << std::left << std::setw(12) << to_string(t) << std::right << std::setw(7) << fixed(r.rtf, 4) << std::setw(10)
      << fixed(r.delay_s, 2) << std::setw(13) << fixed(r.carryover_s, 2) << "\n";
  return kOk;
}

struct RunArgs {
  std::string corpus;
  std::string topology = "style-talker";
  std::string components;
  std::size_t crops = 0;
  std::uint64_t seed = 0;
  std::string out;
};

inline json style_json(const StyleVector& s) { return std::vector<double>(s.values().begin(), s.values().end()); }

inline int cmd_run(const RunArgs& a, std::ostream& out) {
  const Topology topo = parse_topology(a.topology);
  const RunConfig cfg = load_config(a.components);
  const LatencyMap& lat = cfg.latencies_for(topo);
  const LoadResult loaded = load_corpus(a.corpus);
  const auto& convs = loaded.conversations;

  std::optional<BigramTable> table;
  if (cfg.components.text == TextMode::markov) table = train_markov(convs);
  const CorpusRecognizer asr(corpus_transcripts(convs), cfg.components.asr_wer, a.seed);
  const DspStyleEncoder enc;
  const ToyResponder responder(cfg.components.text, cfg.components.style, oracle_targets(convs), table);
  const HarmonicSynthesizer tts;
  const PipelineComponents comp{asr, enc, responder, tts};

  DialogOptions opt;
  opt.context_window = cfg.context_window;
  opt.token_budget = cfg.token_budget;
  opt.variant = cfg.variant;
  opt.tokens_per_output_second = cfg.tokens_per_output_second;
  opt.units_per_output_second = cfg.units_per_output_second;
  opt.output_asr_wer = cfg.components.asr_wer;
  opt.seed = a.seed;

  const std::vector<DialogCrop> crops = select_crops(convs, a.crops, a.seed);
  const DialogRun run = run_dialog(topo, crops, comp, lat, opt);

  const fs::path dir(a.out);
  fs::create_directories(dir / "audio");
  const json header{{"config", config_to_json(cfg)},
                    {"topology", to_string(topo)},
                    {"seed", a.seed},
                    {"corpus", fs::path(a.corpus).filename().string()}};
  json gen_records = json::array(), ref_records = json::array();
  std::string timeline;
  double delay = 0.0, rtf = 0.0;
  for (std::size_t i = 0; i < run.turns.size(); ++i) {
    const GeneratedTurn& g = run.turns[i];
    const DialogCrop& crop = crops[i];
    const std::string stem = file_stem_of(g.crop_id);
    const std::string gen_wav = "audio/gen_" + stem + ".wav";
    const std::string ref_wav = "audio/ref_" + stem + ".wav";
    write_wav(dir / gen_wav, g.audio);
    if (!crop.target_turn.audio) throw StateError("target turn of " + g.crop_id + " has no audio");
    write_wav(dir / ref_wav, *crop.target_turn.audio);
    gen_records.push_back({{"crop_id", g.crop_id},
                           {"speaker", g.speaker},
                           {"text", g.text},
                           {"asr_text", g.asr_text},
                           {"style", style_json(g.style)},
                           {"audio", gen_wav},
                           {"prompt_tokens", g.prompt_tokens}});
    json ref{{"crop_id", g.crop_id}, {"speaker", crop.target_turn.speaker}, {"text", crop.target_turn.text}, {"audio", ref_wav}};
    if (crop.target_turn.prosodic_style) ref["style"] = style_json(*crop.target_turn.prosodic_style);
    ref_records.push_back(std::move(ref));
    json tl = sim_to_json(run.reports[i]);
    tl["crop_id"] = g.crop_id;
    tl["turn_index"] = i;
    timeline += tl.dump() + "\n";
    delay += run.reports[i].delay_s;
    rtf += run.reports[i].rtf;
  }
  json gen = header, ref = header;
  gen["records"] = std::move(gen_records);
  ref["records"] = std::move(ref_records);
  write_json(dir / "generated.json", gen);
  write_json(dir / "reference.json", ref);
  detail::write_file_atomic(dir / "timeline.jsonl", timeline);

  const double n = static_cast<double>(run.turns.size());
  out << json{{"crops", run.turns.size()}, {"topology", to_string(topo)}, {"mean_delay_s", delay / n},
              {"mean_rtf", rtf / n}, {"out", a.out}}
             .dump()
      << "\n";
  out << "crops  mean_RTF  mean_delay_s\n"
      << std::setw(5) << run.turns.size() << std::setw(10) << fixed(rtf / n, 4) << std::setw(14) << fixed(delay / n, 3)
      << "\n";
  return kOk;
}

struct EvaluateArgs {
  std::string generated;
  std::string reference;
  std::string policy;
  std::string out;
};

inline std::vector<EvalRecord> load_eval_records(const fs::path& path) {
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.contains("records") || !j.at("records").is_array()) throw ConfigError(path.string() + ": no \"records\" array");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::vector<EvalRecord> out;
  for (const auto& r : j.at("records")) {
    EvalRecord e;
    try {
      e.crop_id = r.at("crop_id").get<std::string>();
      e.text = r.at("text").get<std::string>();
      if (r.contains("asr_text") && !r.at("asr_text").is_null()) e.asr_text = r.at("asr_text").get<std::string>();
      if (r.contains("audio") && !r.at("audio").is_null()) e.audio = read_wav(base / r.at("audio").get<std::string>());
    } catch (const json::exception& ex) {
      throw ConfigError(path.string() + ": malformed record: " + ex.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline json report_json(const MetricReport& r) {
  json ac = json::object();
  for (const auto& [k, v] : r.acoustic) ac[k] = v ? json(*v) : json(nullptr);
  return {{"crops", r.crops},
          {"semantic", r.semantic},
          {"acoustic", ac},
          {"speaker_similarity", r.speaker_similarity ? json(*r.speaker_similarity) : json(nullptr)},
          {"wer_mode", r.wer_mode},
          {"bleu_smoothing", kBleuSmoothing},
          {"warnings", r.warnings}};
}

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  NormalizationPolicy policy;
  if (!a.policy.empty()) policy = load_config(a.policy).policy;
  const auto gen = load_eval_records(a.generated);
  const auto ref = load_eval_records(a.reference);
  const MetricReport rep = assemble_report(gen, ref, policy);
  const json rec = report_json(rep);
  if (!a.out.empty()) write_json(a.out, rec);
  out << rec.dump() << "\n";
  out << format_semantic_table(rep) << format_acoustic_table(rep);
  return kOk;
}

struct GradcheckArgs {
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  bool inject_wrong_sign = false;
};

inline int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  if (a.trials == 0) throw ArgumentError("--trials must be >= 1");
  GradcheckOptions o;
  o.trials = a.trials;
  o.seed = a.seed;
  o.flip_style_sign = a.inject_wrong_sign;
  o.flip_text_sign = a.inject_wrong_sign;
  const GradcheckReport r = run_gradcheck(o);
  out << json{{"style_max_rel", r.style_max_rel},     {"text_max_rel", r.text_max_rel},
              {"style_coords", r.style_coords},       {"style_skipped_near_kink", r.style_skipped},
              {"text_coords", r.text_coords},         {"style_ok", r.style_ok},
              {"text_ok", r.text_ok}}
             .dump()
      << "\n";
  out << "gradient     max_rel_err  tolerance  status\n";
  out << "style_loss   " << std::setw(11) << std::scientific << std::setprecision(2) << r.style_max_rel << "  "
      << std::setw(9) << o.style_tolerance << "  " << (r.style_ok ? "ok" : "FAIL") << "\n";
  out << "text_loss    " << std::setw(11) << r.text_max_rel << "  " << std::setw(9) << o.text_tolerance << "  "
      << (r.text_ok ? "ok" : "FAIL") << "\n"
      << std::defaultfloat;
  return r.style_ok && r.text_ok ? kOk : kCheckFailed;
}

struct PromptArgs {
  std::string corpus;
  std::string crop_id;
  std::string variant = "full";
  std::string out;
  std::size_t window = 3;
  std::size_t budget = 1536;
};

inline int cmd_build_prompt(const PromptArgs& a, std::ostream& out) {
  const PromptVariant variant = parse_prompt_variant(a.variant);
  const auto colon = a.crop_id.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == a.crop_id.size())
    throw ArgumentError("--crop-id must look like <conversation>:<k>");
  const std::string conv_id = a.crop_id.substr(0, colon);
  std::size_t k = 0;
  try {
    std::size_t used = 0;
    k = std::stoul(a.crop_id.substr(colon + 1), &used);
    if (used != a.crop_id.size() - colon - 1) throw std::invalid_argument("k");
  } catch (const std::logic_error&) {
    throw ArgumentError("--crop-id must end in a turn number");
  }
  const LoadResult loaded = load_corpus(a.corpus);
  const auto it = std::find_if(loaded.conversations.begin(), loaded.conversations.end(),
                               [&](const Conversation& c) { return c.id == conv_id; });
  if (it == loaded.conversations.end()) throw LookupError("no conversation '" + conv_id + "' in corpus");
  const DialogCrop crop = make_crop(*it, k);

  const CorpusRecognizer asr(corpus_transcripts(loaded.conversations), 0.0, 0);
  const DspStyleEncoder enc;
  const HarmonicSynthesizer tts;
  const ToyResponder unused(TextMode::oracle, StyleMode::oracle, {});
  const PipelineComponents comp{asr, enc, unused, tts};
  const ConversationContext full = crop_context(crop, Topology::style_talker, comp);
  const std::string audio_path = prompt_audio_path(crop);
  const ConversationContext ctx = truncate_to_budget(crop, window(full, a.window), variant, audio_path, a.budget);
  const BuiltPrompt p = build_prompt(crop, ctx, variant, audio_path);

  if (!a.out.empty()) detail::write_file_atomic(a.out, p.text);
  else out << p.text << "\n";
  json slots = json::array();
  for (const auto& s : p.input_style_slots)
    slots.push_back({{"offset", s.offset}, {"source", to_string(s.source)}, {"speaker", s.speaker}, {"entry", s.entry_index}});
  std::ostream& meta = a.out.empty() ? std::cerr : out;
  meta << json{{"crop_id", crop.id()}, {"variant", to_string(variant)}, {"tokens", p.token_count},
               {"output_style_offset", p.output_style_slot}, {"input_style_slots", slots}}
              .dump()
       << "\n";
  meta << "slot  offset  source     speaker\n";
  for (std::size_t i = 0; i < p.input_style_slots.size(); ++i) {
    const auto& s = p.input_style_slots[i];
    meta << std::setw(4) << i << std::setw(8) << s.offset << "  " << std::left << std::setw(9) << to_string(s.source)
         << "  " << s.speaker << std::right << "\n";
  }
  meta << " out" << std::setw(8) << p.output_style_slot << "  response\n";
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Style-aware spoken dialog toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-corpus", "Write the synthetic corpus");
  g->add_option("--n", gen.n, "Number of conversations")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--out", gen.out, "Output corpus file")->required();

  IngestArgs ing;
  auto* i = app.add_subcommand("ingest", "Validate, filter and split a corpus");
  i->add_option("--corpus", ing.corpus, "Input corpus file")->required();
  i->add_option("--out", ing.out, "Output corpus file")->required();
  i->add_flag("--filter-diarization", ing.filter, "Discard multi-speaker segments");
  i->add_flag("--normalize-text", ing.normalize_text, "Apply verbatim normalization to transcripts");
  i->add_option("--split", ing.split, "Train/validation/test ratios")->expected(3)->delimiter(',');
  i->add_option("--seed", ing.seed, "Split seed");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Latency report for one turn");
  s->add_option("--topology", sim.topology, "cascade | style-talker | e2e");
  s->add_option("--config", sim.config, "Run configuration")->required();
  s->add_option("--input-dur", sim.input_dur, "Input seconds")->check(CLI::NonNegativeNumber);
  s->add_option("--output-dur", sim.output_dur, "Output seconds")->check(CLI::NonNegativeNumber);
  s->add_option("--prev-carryover", sim.prev_carryover, "Background work carried in")->check(CLI::NonNegativeNumber);

  RunArgs run;
  auto* r = app.add_subcommand("run", "Generate responses for corpus crops");
  r->add_option("--corpus", run.corpus, "Corpus file")->required();
  r->add_option("--topology", run.topology, "cascade | style-talker | e2e");
  r->add_option("--components", run.components, "Run configuration")->required();
  r->add_option("--crops", run.crops, "Maximum number of crops (0: one per conversation)");
  r->add_option("--seed", run.seed, "Random seed");
  r->add_option("--out", run.out, "Output directory")->required();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score generated turns against references");
  e->add_option("--generated", ev.generated, "generated.json")->required();
  e->add_option("--reference", ev.reference, "reference.json")->required();
  e->add_option("--policy", ev.policy, "Configuration holding the normalization policy");
  e->add_option("--out", ev.out, "Report file");

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  c->add_option("--trials", gc.trials, "Random instances");
  c->add_option("--seed", gc.seed, "Random seed");
  c->add_flag("--inject-wrong-sign", gc.inject_wrong_sign)->group("");

  PromptArgs pr;
  auto* p = app.add_subcommand("build-prompt", "Print the prompt for one crop");
  p->add_option("--corpus", pr.corpus, "Corpus file")->required();
  p->add_option("--crop-id", pr.crop_id, "<conversation>:<k>")->required();
  p->add_option("--variant", pr.variant, "full | no-style | no-audio | asr-style");
  p->add_option("--out", pr.out, "Prompt output file");
  p->add_option("--window", pr.window, "Context turns")->check(CLI::PositiveNumber);
  p->add_option("--budget", pr.budget, "Token budget")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    std::ostringstream o, x;
    const int code = app.exit(ex, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*i) return cmd_ingest(ing, out);
    if (*s) return cmd_simulate(sim, out);
    if (*r) return cmd_run(run, out);
    if (*e) return cmd_evaluate(ev, out);
    if (*c) return cmd_gradcheck(gc, out);
    if (*p) return cmd_build_prompt(pr, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace styletalk::cli
