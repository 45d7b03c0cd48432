#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "samaqm/aqm.hpp"
#include "samaqm/sam.hpp"
#include "samaqm/svm.hpp"
#include "samaqm/transport.hpp"

namespace samaqm::config {

/// Everything needed to build and run one dumbbell scenario, plus the SAM
/// training knobs used when a SAM model has to be built.
struct ScenarioConfig {
  double bandwidth_bps = 1e6;
  double link_delay_s = 0.010;
  std::size_t buffer_packets = 800;
  std::uint32_t packet_bytes = 500;
  std::size_t n_http = 200;
  std::size_t n_ftp = 100;
  double duration_s = 180.0;
  std::uint64_t seed = 1;
  /// droptail, red, blue, pi or sam. Empty until set.
  std::string controller;
  double sample_interval_s = 0.1;

  double http_size_mean = 10.0;
  double http_idle_mean = 1.0;
  double start_jitter_s = 10.0;
  double initial_ssthresh = 64.0;

  aqm::RedParams red;
  aqm::BlueParams blue;
  aqm::PiParams pi;
  /// Multiplies pi.a and pi.b. The default gains were designed for a much
  /// faster link; slower links need a larger loop gain to reach q_ref.
  double pi_gain_scale = 1.0;

  std::string sam_model_path;
  /// Only "policy" is implemented.
  std::string sam_label_mode = "policy";
  sam::LabelPolicy policy;
  svm::TrainConfig svm;
  std::size_t train_n = 2000;

  transport::TrafficMix traffic_mix() const;
  /// RED parameters with the typical service time derived from the link.
  aqm::RedParams red_params() const;
  /// PI parameters with pi_gain_scale applied.
  aqm::PiParams pi_params() const;
};

enum class Preset { None, Desk, Paper };

/// Parses "desk" / "paper"; throws BadValueError otherwise.
Preset parse_preset(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class MissingKeyError : public ConfigError {
 public:
  explicit MissingKeyError(const std::string& key);
};

class BadValueError : public ConfigError {
 public:
  BadValueError(const std::string& key, std::string_view value, const std::string& why);
};

class UnknownKeyError : public ConfigError {
 public:
  explicit UnknownKeyError(const std::string& key);
};

/// Malformed line in a config file.
class SyntaxError : public ConfigError {
 public:
  SyntaxError(std::size_t line, const std::string& what);
};

inline const std::vector<std::string_view> kControllers{"droptail", "red", "blue", "pi", "sam"};

void apply_preset(ScenarioConfig& cfg, Preset preset);

/// Sets one key from its textual value.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Applies a `key=value` override string.
void apply_override(ScenarioConfig& cfg, std::string_view assignment);

/// Flat `key = value` lines with `#` comments.
void apply_text(ScenarioConfig& cfg, std::string_view text);

/// Applies the preset first; the file (if any) and then the overrides win over it.
ScenarioConfig parse_config(const std::optional<std::filesystem::path>& path,
                            std::span<const std::string> overrides, Preset preset = Preset::None);

/// Requirements for simulating `cfg.controller`: the controller key is set
/// and sam has a model path. Throws MissingKeyError.
void require_runnable(const ScenarioConfig& cfg);

std::vector<std::string> known_keys();

/// Current values as `key = value` lines, in known_keys() order.
std::string format_config(const ScenarioConfig& cfg);

}  // namespace samaqm::config
