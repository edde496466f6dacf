#pragma once

// Run configuration: latency models per topology, component selection,
// loss weight, normalization policy and prompt settings. Read from a single
// JSON document; every run embeds the resolved form in its output.

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "styletalk/components.hpp"
#include "styletalk/error.hpp"
#include "styletalk/metrics.hpp"
#include "styletalk/prompt.hpp"
#include "styletalk/scheduler.hpp"
#include "styletalk/wav.hpp"

namespace styletalk {

struct ComponentConfig {
  TextMode text = TextMode::oracle;
  StyleMode style = StyleMode::oracle;
  double asr_wer = 0.0;  // recognizer substitution rate
};

struct RunConfig {
  std::map<std::string, LatencyMap> latencies;  // keyed by topology name
  ComponentConfig components;
  double lambda = 1.0;
  NormalizationPolicy policy;
  std::size_t context_window = 3;
  std::size_t token_budget = 1536;
  PromptVariant variant = PromptVariant::full;
  double tokens_per_output_second = 3.0;
  double units_per_output_second = 50.0;

  const LatencyMap& latencies_for(Topology t) const {
    const auto it = latencies.find(to_string(t));
    if (it == latencies.end())
      throw ConfigError(std::string("config has no latency models for topology '") + to_string(t) + "'");
    return it->second;
  }
};

inline const char* to_string(TextMode m) { return m == TextMode::oracle ? "oracle" : "markov"; }

inline const char* to_string(StyleMode m) {
  switch (m) {
    case StyleMode::oracle: return "oracle";
    case StyleMode::context_average: return "context_average";
    case StyleMode::last_same_speaker: return "last_same_speaker";
  }
  return "oracle";
}

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

inline LatencyModel latency_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  static const std::set<std::string> known{"fixed_s", "per_input_audio_s", "per_output_token_s",
                                           "per_output_audio_s", "streaming"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw ConfigError(where + ": unknown field \"" + k + "\"");
  LatencyModel m;
  m.fixed_s = get_or(j, "fixed_s", 0.0);
  m.per_input_audio_s = get_or(j, "per_input_audio_s", 0.0);
  m.per_output_token_s = get_or(j, "per_output_token_s", 0.0);
  m.per_output_audio_s = get_or(j, "per_output_audio_s", 0.0);
  m.streaming = get_or(j, "streaming", false);
  m.validate();
  return m;
}

inline nlohmann::json latency_to_json(const LatencyModel& m) {
  return {{"fixed_s", m.fixed_s},
          {"per_input_audio_s", m.per_input_audio_s},
          {"per_output_token_s", m.per_output_token_s},
          {"per_output_audio_s", m.per_output_audio_s},
          {"streaming", m.streaming}};
}

inline TextMode parse_text_mode(const std::string& s) {
  if (s == "oracle") return TextMode::oracle;
  if (s == "markov") return TextMode::markov;
  throw ConfigError("unknown text component '" + s + "'");
}

inline StyleMode parse_style_mode(const std::string& s) {
  if (s == "oracle") return StyleMode::oracle;
  if (s == "context_average") return StyleMode::context_average;
  if (s == "last_same_speaker") return StyleMode::last_same_speaker;
  throw ConfigError("unknown style component '" + s + "'");
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  if (j.contains("latencies")) {
    for (const auto& [topo, stages] : j.at("latencies").items()) {
      const Topology t = [&] {
        try {
          return parse_topology(topo);
        } catch (const ArgumentError& e) {
          throw ConfigError(e.what());
        }
      }();
      if (!stages.is_object()) throw ConfigError("latencies." + topo + " must be an object");
      LatencyMap m;
      for (const auto& [stage, model] : stages.items()) m[stage] = detail::latency_from_json(model, topo + "." + stage);
      c.latencies[to_string(t)] = std::move(m);
    }
  }
  if (j.contains("components")) {
    const auto& cj = j.at("components");
    c.components.text = detail::parse_text_mode(detail::get_or<std::string>(cj, "text", "oracle"));
    c.components.style = detail::parse_style_mode(detail::get_or<std::string>(cj, "style", "oracle"));
    c.components.asr_wer = detail::get_or(cj, "asr_wer", 0.0);
    if (!(c.components.asr_wer >= 0.0 && c.components.asr_wer <= 1.0))
      throw ConfigError("components.asr_wer must be within [0, 1]");
  }
  c.lambda = detail::get_or(j, "lambda", c.lambda);
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (j.contains("normalization")) {
    const auto& nj = j.at("normalization");
    c.policy.lowercase = detail::get_or(nj, "lowercase", true);
    c.policy.strip_punctuation = detail::get_or(nj, "strip_punctuation", true);
    c.policy.fillers = detail::get_or(nj, "fillers", NormalizationPolicy::default_fillers());
  }
  const auto window = detail::get_or<long long>(j, "context_window", 3);
  if (window < 1) throw ConfigError("context_window must be >= 1");
  c.context_window = static_cast<std::size_t>(window);
  const auto budget = detail::get_or<long long>(j, "token_budget", 1536);
  if (budget < 1) throw ConfigError("token_budget must be >= 1");
  c.token_budget = static_cast<std::size_t>(budget);
  try {
    c.variant = parse_prompt_variant(detail::get_or<std::string>(j, "prompt_variant", "full"));
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  c.tokens_per_output_second = detail::get_or(j, "tokens_per_output_second", c.tokens_per_output_second);
  c.units_per_output_second = detail::get_or(j, "units_per_output_second", c.units_per_output_second);
  if (!(c.tokens_per_output_second >= 0.0) || !(c.units_per_output_second >= 0.0))
    throw ConfigError("token rates must be >= 0");
  return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json lat = nlohmann::json::object();
  for (const auto& [topo, stages] : c.latencies) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [name, m] : stages) s[name] = detail::latency_to_json(m);
    lat[topo] = std::move(s);
  }
  return {{"latencies", std::move(lat)},
          {"components",
           {{"text", to_string(c.components.text)},
            {"style", to_string(c.components.style)},
            {"asr_wer", c.components.asr_wer}}},
          {"lambda", c.lambda},
          {"normalization",
           {{"lowercase", c.policy.lowercase},
            {"strip_punctuation", c.policy.strip_punctuation},
            {"fillers", c.policy.fillers}}},
          {"context_window", c.context_window},
          {"token_budget", c.token_budget},
          {"prompt_variant", to_string(c.variant)},
          {"tokens_per_output_second", c.tokens_per_output_second},
          {"units_per_output_second", c.units_per_output_second}};
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace styletalk
