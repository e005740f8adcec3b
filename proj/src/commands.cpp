#include "avfc/commands.hpp"

#include <fstream>
#include <ostream>

#include "avfc/parallel.hpp"

namespace avfc {

namespace {

constexpr int kCsvDigits = 10;

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

OutputFormat pick_format(const CommandOptions& options, const RunConfig& config,
                         OutputFormat fallback) {
  if (options.format) return *options.format;
  if (config.format) return *config.format;
  return fallback;
}

void emit(const std::string& text, const CommandOptions& options, const RunConfig& config,
          std::ostream& out) {
  const std::string path = options.out ? *options.out : config.output;
  if (path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open output file: " + path);
  file << text;
  if (!file.flush()) throw Error("failed writing output file: " + path);
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

unsigned resolve_workers(const CommandOptions& options) {
  return options.workers > 0 ? options.workers : worker_count();
}

std::string compute_csv(const json& results) {
  std::string s = "config,value_bits,symmetrized\n";
  for (const auto& r : results) {
    s += r["config"].get<std::string>() + "," +
         format_number(r["value_bits"].get<double>(), kCsvDigits) + "," +
         (r["symmetrized"].get<bool>() ? "true" : "false") + "\n";
  }
  return s;
}

// Flattens nested objects into key,value lines with dotted keys.
void flatten(const json& j, const std::string& prefix, std::string& s) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, s);
    } else if (value.is_number_float()) {
      s += name + "," + format_number(value.get<double>(), kCsvDigits) + "\n";
    } else if (value.is_string()) {
      s += name + "," + csv_escape(value.get<std::string>()) + "\n";
    } else {
      s += name + "," + value.dump() + "\n";
    }
  }
}

std::string report_csv(const sim::SimReport& r) {
  std::string warnings;
  for (std::size_t i = 0; i < r.warnings.size(); ++i) {
    if (i > 0) warnings += "; ";
    warnings += r.warnings[i];
  }
  return "trials,errors,error_rate,wilson_halfwidth_95,avg_tx_power,avg_jam_power,warnings\n" +
         std::to_string(r.trials) + "," + std::to_string(r.errors) + "," +
         format_number(r.error_rate, kCsvDigits) + "," +
         format_number(r.wilson_halfwidth_95, kCsvDigits) + "," +
         format_number(r.avg_tx_power, kCsvDigits) + "," +
         format_number(r.avg_jam_power, kCsvDigits) + "," + csv_escape(warnings) + "\n";
}

}  // namespace

json compute_results(const RunConfig& config) {
  const auto options = config.capacity_options();
  json results = json::array();
  for (auto k : config.configs) {
    results.push_back(to_json(compute(k, config.params, config.model, options)));
  }
  return results;
}

std::vector<CurveRow> curve_rows(const RunConfig& config, unsigned workers) {
  const auto grid = config.lambda_grid.value_or(LambdaGrid{}).points();
  const auto options = config.capacity_options();
  std::vector<CurveRow> rows(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    auto params = config.params;
    params.Lambda = grid[i];
    CurveRow& row = rows[i];
    row.lambda = grid[i];
    row.uu = cap_uu(params, config.model, options).value_bits;
    row.tx = cap_tx_knows(params, config.model, options).value_bits;
    row.jam = cap_jam_knows(params, config.model, options).value_bits;
    row.both = cap_both_know(params, config.model, options).value_bits;
    row.nc = cap_nc(params, config.model, options).value_bits;
    row.gavc = gavc_reference(params);
  });
  return rows;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::string s = std::string(kCurveHeader) + "\n";
  for (const auto& r : rows) {
    for (double v : {r.lambda, r.uu, r.tx, r.jam, r.both, r.nc}) {
      s += format_number(v, kCsvDigits);
      s += ',';
    }
    s += format_number(r.gavc, kCsvDigits);
    s += '\n';
  }
  return s;
}

json curve_json(const std::vector<CurveRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"lambda", r.lambda},
                   {"C_UU", r.uu},
                   {"C_TX", r.tx},
                   {"C_JAM", r.jam},
                   {"C_BOTH", r.both},
                   {"C_NC", r.nc},
                   {"C_GAVC", r.gavc}});
  }
  return out;
}

json symcheck(const RunConfig& config) {
  const auto& p = config.params;
  const auto& model = config.model;
  const double eg2p = model.second_moment() * p.P;
  const bool unbounded = model.unbounded_support();
  const double support_sup = p.P * model.hi() * model.hi();

  json both = {{"unbounded_support", unbounded},
               {"symmetrizable", !unbounded && support_sup <= p.Lambda}};
  if (unbounded) {
    // The supremum over policies is infinite; the truncated figure is what
    // the quantized solvers actually see.
    both["sup_g2phi"] = nullptr;
    both["truncated_sup_g2phi"] = support_sup;
  } else {
    both["sup_g2phi"] = support_sup;
  }
  return {{"P", p.P},
          {"Lambda", p.Lambda},
          {"sigma2", p.sigma2},
          {"E_G2_P", eg2p},
          {"jam_knows", {{"threshold", eg2p}, {"symmetrizable", eg2p <= p.Lambda}}},
          {"both_know", both},
          {"nc", {{"symmetrizable", false}}}};
}

sim::SimConfig make_sim_config(const RunConfig& config) {
  if (!config.sim) throw ConfigError("config has no \"sim\" block");
  const auto& s = *config.sim;
  sim::SimConfig c;
  c.params = config.params;
  c.model = config.model;
  c.config = s.config;
  c.adversary = s.adversary;
  c.trials = s.trials;
  c.n = s.n;
  c.rate_bits = s.rate_bits;
  c.seed = s.seed;
  c.gamma = s.gamma;
  c.noiseless = s.noiseless;
  c.phi = sim::PowerProfile::flat(config.params.P);

  const bool tx_adapts = s.config == KnowledgeConfig::TxKnows ||
                         s.config == KnowledgeConfig::BothKnow || s.config == KnowledgeConfig::NC;
  const bool jam_adapts = s.adversary == sim::AdversaryKind::GainAdaptive;
  if (jam_adapts &&
      (s.config == KnowledgeConfig::UU || s.config == KnowledgeConfig::TxKnows)) {
    throw ConfigError("gain_adaptive adversary requires a configuration where the jammer knows "
                      "the gains");
  }
  if (!tx_adapts && !jam_adapts) return c;

  const auto result = compute(s.config, config.params, config.model, config.capacity_options());
  if (tx_adapts && result.phi) c.phi = sim::PowerProfile::from(*result.phi);
  if (jam_adapts) {
    if (!result.psi) {
      throw ConfigError("no jammer policy exists in the symmetrizable regime; use the mimic "
                        "adversary");
    }
    c.psi = sim::PowerProfile::from(*result.psi);
  }
  return c;
}

int cmd_compute(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto config = load_run_config(options.config_path);
    const auto results = compute_results(config);
    const auto format = pick_format(options, config, OutputFormat::Json);
    emit(format == OutputFormat::Json ? json_text(results) : compute_csv(results), options,
         config, out);
  });
}

int cmd_curve(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto config = load_run_config(options.config_path);
    const auto rows = curve_rows(config, resolve_workers(options));
    const auto format = pick_format(options, config, OutputFormat::Csv);
    emit(format == OutputFormat::Csv ? curve_csv(rows) : json_text(curve_json(rows)), options,
         config, out);
  });
}

int cmd_symcheck(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto config = load_run_config(options.config_path);
    const auto report = symcheck(config);
    const auto format = pick_format(options, config, OutputFormat::Json);
    std::string csv = "key,value\n";
    if (format == OutputFormat::Csv) flatten(report, "", csv);
    emit(format == OutputFormat::Json ? json_text(report) : csv, options, config, out);
  });
}

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto config = load_run_config(options.config_path);
    const auto report = sim::run_trials(make_sim_config(config), resolve_workers(options));
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    const auto format = pick_format(options, config, OutputFormat::Json);
    emit(format == OutputFormat::Json ? json_text(to_json(report)) : report_csv(report), options,
         config, out);
  });
}

int run_command(std::string_view name, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  if (name == "compute") return cmd_compute(options, out, err);
  if (name == "curve") return cmd_curve(options, out, err);
  if (name == "symcheck") return cmd_symcheck(options, out, err);
  if (name == "simulate") return cmd_simulate(options, out, err);
  err << "unknown command: " << name << "\n";
  return kExitConfigError;
}

}  // namespace avfc
