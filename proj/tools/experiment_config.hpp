// Experiment configuration for the command-line tool: a JSON document whose
// keys mirror the library types. Missing keys take the defaults of the
// four-spike reconstruction demo; unknown keys are rejected.
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcs/evaluation.hpp"

namespace qcs::app {

/// Invalid configuration; the message starts with the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Spike {
  double position = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Either "oracle" (computed from the known object) or a fixed value.
/// For zeta, an absent value means no mixed-norm bound.
struct BoundSetting {
  bool oracle = true;
  std::optional<double> value;
};

enum class SweepKind { noise, peaks, samples };

std::optional<SweepKind> parse_sweep_kind(std::string_view name);
const char* to_string(SweepKind kind);

struct SweepSettings {
  /// Swept values; empty picks the default grid of the kind.
  std::vector<double> values;
  int trials = 20;
  /// Range the spike train spans in a peaks sweep.
  double range = 1.3;
  unsigned threads = 0;
  /// Also run the non-sparse baseline (always on for the noise sweep).
  bool baseline = false;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::reconstruction_demo();
  /// Explicit object; replaces the random spike train when present.
  std::optional<std::vector<Spike>> spikes;
  /// Window the measurement positions span; defaults to the grid window.
  std::optional<double> measurement_window;
  std::uint64_t seed = 1;
  BoundSetting zeta;
  BoundSetting epsilon;
  SweepSettings sweep;
  bool plots = true;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Fully resolved configuration, suitable for from_json.
  nlohmann::json to_json() const;

  std::vector<double> positions() const;
  ObjectField object() const;
  /// Values of a sweep, falling back to the kind's defaults.
  std::vector<double> sweep_values(SweepKind kind) const;
};

}  // namespace qcs::app
