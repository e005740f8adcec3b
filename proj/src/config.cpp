#include "avfc/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace avfc {

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!names.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

std::uint64_t count(const json& j, const std::string& what) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                 j.get<std::int64_t>() < 0)) {
    throw ConfigError(what + " must be a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) throw ConfigError(what + " must be a string");
  return j.get<std::string>();
}

ChannelParams parse_params(const json& j) {
  check_keys(j, {"P", "Lambda", "sigma2"}, "params");
  ChannelParams p{number(require(j, "P", "params"), "params.P"),
                  number(require(j, "Lambda", "params"), "params.Lambda"),
                  number(require(j, "sigma2", "params"), "params.sigma2")};
  p.validate();
  return p;
}

LambdaGrid parse_grid(const json& j) {
  check_keys(j, {"lo", "hi", "steps"}, "lambda_grid");
  LambdaGrid g;
  g.lo = number(require(j, "lo", "lambda_grid"), "lambda_grid.lo");
  g.hi = number(require(j, "hi", "lambda_grid"), "lambda_grid.hi");
  g.steps = static_cast<int>(count(require(j, "steps", "lambda_grid"), "lambda_grid.steps"));
  g.validate();
  return g;
}

SimSettings parse_sim(const json& j) {
  check_keys(j, {"config", "adversary", "trials", "n", "rate_bits", "seed", "gamma", "noiseless"},
             "sim");
  SimSettings s;
  s.trials = count(require(j, "trials", "sim"), "sim.trials");
  s.n = count(require(j, "n", "sim"), "sim.n");
  s.rate_bits = number(require(j, "rate_bits", "sim"), "sim.rate_bits");
  if (j.contains("config")) s.config = parse_knowledge_config(text(j["config"], "sim.config"));
  if (j.contains("adversary")) {
    s.adversary = sim::parse_adversary(text(j["adversary"], "sim.adversary"));
  }
  if (j.contains("seed")) s.seed = count(j["seed"], "sim.seed");
  if (j.contains("gamma")) s.gamma = number(j["gamma"], "sim.gamma");
  if (j.contains("noiseless")) {
    if (!j["noiseless"].is_boolean()) throw ConfigError("sim.noiseless must be a boolean");
    s.noiseless = j["noiseless"].get<bool>();
  }
  if (s.trials < 1) throw ConfigError("sim.trials must be >= 1");
  if (s.n < 1 || s.n > sim::kMaxBlocklength) throw ConfigError("sim.n out of range");
  if (!(s.rate_bits > 0.0) || !std::isfinite(s.rate_bits)) {
    throw ConfigError("sim.rate_bits must be positive");
  }
  if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw ConfigError("sim.gamma must be in (0, 1)");
  return s;
}

json sim_to_json(const SimSettings& s) {
  return {{"config", std::string(to_string(s.config))},
          {"adversary", std::string(sim::to_string(s.adversary))},
          {"trials", s.trials},
          {"n", s.n},
          {"rate_bits", s.rate_bits},
          {"seed", s.seed},
          {"gamma", s.gamma},
          {"noiseless", s.noiseless}};
}

}  // namespace

void LambdaGrid::validate() const {
  if (!(lo > 0.0) || !std::isfinite(lo)) throw ConfigError("lambda_grid.lo must be positive");
  if (!(hi > lo) || !std::isfinite(hi)) throw ConfigError("lambda_grid.hi must exceed lo");
  if (steps < 2) throw ConfigError("lambda_grid.steps must be >= 2");
}

std::vector<double> LambdaGrid::points() const {
  validate();
  std::vector<double> pts(static_cast<std::size_t>(steps));
  const double step = (hi - lo) / (steps - 1);
  for (int i = 0; i < steps; ++i) pts[static_cast<std::size_t>(i)] = lo + i * step;
  pts.back() = hi;
  return pts;
}

CapacityOptions RunConfig::capacity_options() const {
  CapacityOptions o;
  o.cells = quantization_cells;
  return o;
}

FadingModel parse_model(const json& j) {
  if (!j.is_object() || j.size() != 1) {
    throw ConfigError("model must be an object with exactly one of "
                      "rayleigh, discrete, density, uniform");
  }
  const auto& [kind, body] = *j.items().begin();
  if (kind == "rayleigh") {
    check_keys(body, {"scale"}, "model.rayleigh");
    return FadingModel::rayleigh(number(require(body, "scale", "model.rayleigh"), "scale"));
  }
  if (kind == "discrete") {
    if (!body.is_array()) throw ConfigError("model.discrete must be a list of [gain, prob]");
    std::vector<GainAtom> atoms;
    for (const auto& pair : body) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("model.discrete entries must be [gain, prob] pairs");
      }
      atoms.push_back({number(pair[0], "gain"), number(pair[1], "prob")});
    }
    return FadingModel::discrete(std::move(atoms));
  }
  if (kind == "density") {
    check_keys(body, {"lo", "hi", "pdf"}, "model.density");
    const auto& pdf = require(body, "pdf", "model.density");
    if (!pdf.is_array()) throw ConfigError("model.density.pdf must be a list of numbers");
    std::vector<double> values;
    for (const auto& v : pdf) values.push_back(number(v, "model.density.pdf entry"));
    return FadingModel::tabulated(number(require(body, "lo", "model.density"), "lo"),
                                  number(require(body, "hi", "model.density"), "hi"),
                                  std::move(values));
  }
  if (kind == "uniform") {
    check_keys(body, {"lo", "hi"}, "model.uniform");
    return FadingModel::uniform(number(require(body, "lo", "model.uniform"), "lo"),
                                number(require(body, "hi", "model.uniform"), "hi"));
  }
  throw ConfigError("unknown model kind '" + kind + "'");
}

json model_to_json(const FadingModel& model) {
  const auto& kind = model.kind();
  if (const auto* r = std::get_if<Rayleigh>(&kind)) {
    return {{"rayleigh", {{"scale", r->scale}}}};
  }
  if (const auto* d = std::get_if<Discrete>(&kind)) {
    json atoms = json::array();
    for (const auto& a : d->atoms) atoms.push_back({a.gain, a.prob});
    return {{"discrete", atoms}};
  }
  const auto& t = std::get<TruncatedDensity>(kind);
  if (t.table.empty()) throw ConfigError("density without a table cannot be serialized");
  return {{"density", {{"lo", t.lo}, {"hi", t.hi}, {"pdf", t.table}}}};
}

RunConfig parse_run_config(const json& j) {
  try {
    check_keys(j,
               {"params", "model", "configs", "lambda_grid", "quantization_cells", "sim", "output",
                "format"},
               "config");
    RunConfig c;
    c.params = parse_params(require(j, "params", "config"));
    c.model = parse_model(require(j, "model", "config"));
    if (j.contains("configs")) {
      const auto& list = j["configs"];
      if (!list.is_array() || list.empty()) {
        throw ConfigError("configs must be a non-empty list of names");
      }
      c.configs.clear();
      for (const auto& name : list) c.configs.push_back(parse_knowledge_config(text(name, "configs entry")));
    }
    if (j.contains("lambda_grid")) c.lambda_grid = parse_grid(j["lambda_grid"]);
    if (j.contains("quantization_cells")) {
      const auto cells = count(j["quantization_cells"], "quantization_cells");
      if (cells < 1 || cells > (1u << 20)) throw ConfigError("quantization_cells out of range");
      c.quantization_cells = static_cast<int>(cells);
    }
    if (j.contains("sim")) c.sim = parse_sim(j["sim"]);
    if (j.contains("output")) c.output = text(j["output"], "output");
    if (j.contains("format")) c.format = parse_format(text(j["format"], "format"));
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json configs = json::array();
  for (auto k : c.configs) configs.push_back(std::string(to_string(k)));
  json j = {{"params", {{"P", c.params.P}, {"Lambda", c.params.Lambda}, {"sigma2", c.params.sigma2}}},
            {"model", model_to_json(c.model)},
            {"configs", configs},
            {"quantization_cells", c.quantization_cells}};
  if (c.lambda_grid) {
    j["lambda_grid"] = {{"lo", c.lambda_grid->lo}, {"hi", c.lambda_grid->hi},
                        {"steps", c.lambda_grid->steps}};
  }
  if (c.sim) j["sim"] = sim_to_json(*c.sim);
  if (!c.output.empty()) j["output"] = c.output;
  if (c.format) j["format"] = to_string(*c.format);
  return j;
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ConfigError("format must be csv or json, got '" + name + "'");
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "json";
}

json to_json(const AllocationPolicy& policy) {
  json gains = json::array();
  json probs = json::array();
  for (const auto& a : policy.atoms->atoms) {
    gains.push_back(a.gain);
    probs.push_back(a.prob);
  }
  json j = {{"budget", policy.budget},
            {"mean", policy.mean()},
            {"gains", gains},
            {"probs", probs},
            {"values", policy.values}};
  return j;
}

json to_json(const CapacityResult& r) {
  json diagnostics = json::object();
  for (const auto& [key, value] : r.diagnostics) diagnostics[key] = value;
  json j = {{"config", std::string(to_string(r.config))},
            {"value_bits", r.value_bits},
            {"symmetrized", r.symmetrized},
            {"diagnostics", diagnostics}};
  if (r.phi) j["phi"] = to_json(*r.phi);
  if (r.psi) j["psi"] = to_json(*r.psi);
  return j;
}

json to_json(const sim::SimReport& r) {
  return {{"trials", r.trials},
          {"errors", r.errors},
          {"error_rate", r.error_rate},
          {"wilson_halfwidth_95", r.wilson_halfwidth_95},
          {"avg_tx_power", r.avg_tx_power},
          {"avg_jam_power", r.avg_jam_power},
          {"warnings", r.warnings}};
}

std::string format_number(double x) {
  if (x == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf.data(), end);
}

std::string format_number(double x, int digits) {
  if (x == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                       std::chars_format::general, digits);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf.data(), end);
}

}  // namespace avfc
