#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "styletalk/dialog.hpp"

namespace support {

inline std::filesystem::path source_dir() { return STYLETALK_SOURCE_DIR; }

inline styletalk::AudioClip sine(double hz, double amplitude, double seconds = 1.0, int sr = 16000) {
  std::vector<double> x(static_cast<std::size_t>(seconds * sr));
  for (std::size_t n = 0; n < x.size(); ++n)
    x[n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / sr);
  return styletalk::AudioClip(sr, std::move(x));
}

inline styletalk::AudioClip sine_plus_noise(double hz, double amplitude, double sigma, std::uint64_t seed,
                                            double seconds = 1.0, int sr = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(seconds * sr));
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double v = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / sr) +
                     sigma * amplitude * g(rng);
    x[n] = std::clamp(v, -1.0, 1.0);
  }
  return styletalk::AudioClip(sr, std::move(x));
}

inline std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                                             std::size_t vocab = 4) {
  static const std::vector<std::string> pool{"cat", "sat", "mat", "dog", "ran", "far", "the", "big"};
  const std::size_t n = std::uniform_int_distribution<std::size_t>(min_len, max_len)(rng);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[std::uniform_int_distribution<std::size_t>(0, vocab - 1)(rng)]);
  return out;
}

inline std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "styletalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = styletalk::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// First line of a subcommand's stdout is its JSON record.
inline nlohmann::json first_json_line(const std::string& s) { return nlohmann::json::parse(s.substr(0, s.find('\n'))); }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("styletalk_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace support
