#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "avfc/capacity.hpp"
#include "avfc/fading.hpp"
#include "avfc/params.hpp"
#include "avfc/simulate.hpp"

namespace avfc {

using nlohmann::json;

struct LambdaGrid {
  double lo = 0.05;
  double hi = 5.0;
  int steps = 100;

  void validate() const;
  // `steps` evenly spaced points from lo to hi inclusive.
  std::vector<double> points() const;

  bool operator==(const LambdaGrid&) const = default;
};

// The "sim" block of a run config. The transmitter policy (and the jammer
// policy for the gain-adaptive adversary) come from the capacity solution
// of `config`.
struct SimSettings {
  KnowledgeConfig config = KnowledgeConfig::UU;
  sim::AdversaryKind adversary = sim::AdversaryKind::IidGaussian;
  std::size_t trials = 100;
  std::size_t n = 256;
  double rate_bits = 0.1;
  std::uint64_t seed = 1;
  double gamma = sim::kDefaultGamma;
  bool noiseless = false;

  bool operator==(const SimSettings&) const = default;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
  ChannelParams params;
  FadingModel model = FadingModel::rayleigh(1.0);
  std::vector<KnowledgeConfig> configs{std::begin(kAllConfigs), std::end(kAllConfigs)};
  std::optional<LambdaGrid> lambda_grid;
  int quantization_cells = 256;
  std::optional<SimSettings> sim;
  std::string output;  // empty: stdout
  std::optional<OutputFormat> format;

  CapacityOptions capacity_options() const;
};

// All parse functions throw ConfigError on missing keys, wrong types or
// out-of-range values.
FadingModel parse_model(const json& j);
json model_to_json(const FadingModel& model);

RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::string& path);
json to_json(const RunConfig& config);

OutputFormat parse_format(const std::string& name);
std::string to_string(OutputFormat format);

json to_json(const AllocationPolicy& policy);
json to_json(const CapacityResult& result);
json to_json(const sim::SimReport& report);

// Shortest round-trip decimal form of x ('.' separator, locale independent).
std::string format_number(double x);
// Same, rounded to `digits` significant digits.
std::string format_number(double x, int digits);

}  // namespace avfc
