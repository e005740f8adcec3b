#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <string>

#include "avfc/capacity.hpp"
#include "avfc/commands.hpp"
#include "avfc/config.hpp"
#include "avfc/parallel.hpp"
#include "support.hpp"

using namespace avfc;
namespace t = avfc::testing;

namespace {

const std::string kConfigDir = AVFC_CONFIG_DIR;

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<double> split_row(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::string_view command, const std::string& config_text,
        std::optional<OutputFormat> format = std::nullopt, unsigned workers = 1) {
  t::TempFile file("avfc_cfg", config_text);
  CommandOptions o;
  o.config_path = file.path();
  o.format = format;
  o.workers = workers;
  std::ostringstream out, err;
  const int code = run_command(command, o, out, err);
  return {code, out.str(), err.str()};
}

const char* kPointMass = R"({
  "params": {"P": 1, "Lambda": 1.5, "sigma2": 0.25},
  "model": {"discrete": [[1, 1]]},
  "configs": ["UU", "BOTH_KNOW", "NC"]
})";

}  // namespace

TEST_CASE("config: full parse") {
  const auto c = parse_run_config(json::parse(R"({
    "params": {"P": 2, "Lambda": 0.5, "sigma2": 0.1},
    "model": {"rayleigh": {"scale": 1.5}},
    "configs": ["NC", "UU"],
    "lambda_grid": {"lo": 0.1, "hi": 2, "steps": 5},
    "quantization_cells": 64,
    "sim": {"config": "BOTH_KNOW", "adversary": "mimic", "trials": 10, "n": 32,
            "rate_bits": 0.0625, "seed": 9, "gamma": 0.1, "noiseless": true},
    "output": "out.csv",
    "format": "csv"
  })"));
  CHECK(c.params == ChannelParams{2.0, 0.5, 0.1});
  CHECK(c.model.unbounded_support());
  CHECK(c.configs == std::vector<KnowledgeConfig>{KnowledgeConfig::NC, KnowledgeConfig::UU});
  REQUIRE(c.lambda_grid);
  CHECK(c.lambda_grid->points() == std::vector<double>{0.1, 0.575, 1.05, 1.525, 2.0});
  CHECK(c.quantization_cells == 64);
  REQUIRE(c.sim);
  CHECK(c.sim->adversary == sim::AdversaryKind::Mimic);
  CHECK(c.sim->seed == 9);
  CHECK(c.sim->noiseless);
  CHECK(c.output == "out.csv");
  CHECK(c.format == OutputFormat::Csv);
}

TEST_CASE("config: defaults") {
  const auto c = parse_run_config(json::parse(
      R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25}, "model": {"uniform": {"lo": 0, "hi": 2}}})"));
  CHECK(c.configs.size() == 5);
  CHECK_FALSE(c.lambda_grid);
  CHECK(c.quantization_cells == 256);
  CHECK_FALSE(c.sim);
  const auto grid = LambdaGrid{}.points();
  CHECK(grid.size() == 100);
  CHECK(grid.front() == 0.05);
  CHECK(grid.back() == 5.0);
}

TEST_CASE("config: rejects malformed input") {
  const std::string params = R"("params": {"P": 1, "Lambda": 1, "sigma2": 0.25})";
  const std::string model = R"("model": {"rayleigh": {"scale": 1}})";
  for (const std::string body : {
           "{" + model + "}",
           "{" + params + "}",
           "{" + params + "," + model + R"(, "extra": 1})",
           R"({"params": {"P": -1, "Lambda": 1, "sigma2": 0.25},)" + model + "}",
           R"({"params": {"P": "1", "Lambda": 1, "sigma2": 0.25},)" + model + "}",
           "{" + params + R"(, "model": {"rayleigh": {"scale": 1}, "discrete": [[1, 1]]}})",
           "{" + params + R"(, "model": {"lognormal": {"mu": 0}}})",
           "{" + params + R"(, "model": {"discrete": [[1, 0.5]]}})",
           "{" + params + "," + model + R"(, "configs": ["XX"]})",
           "{" + params + "," + model + R"(, "configs": []})",
           "{" + params + "," + model + R"(, "lambda_grid": {"lo": 0, "hi": 1, "steps": 3}})",
           "{" + params + "," + model + R"(, "lambda_grid": {"lo": 1, "hi": 1, "steps": 3}})",
           "{" + params + "," + model + R"(, "lambda_grid": {"lo": 0.1, "hi": 1, "steps": 1}})",
           "{" + params + "," + model + R"(, "quantization_cells": 0})",
           "{" + params + "," + model + R"(, "format": "xml"})",
           "{" + params + "," + model + R"(, "sim": {"trials": 1, "n": 10000, "rate_bits": 0.1}})",
           "{" + params + "," + model + R"(, "sim": {"trials": 1, "n": 10}})",
           "{" + params + "," + model + R"(, "sim": {"trials": -1, "n": 10, "rate_bits": 0.1}})",
       }) {
    CAPTURE(body);
    CHECK_THROWS_AS(parse_run_config(json::parse(body)), ConfigError);
  }
  CHECK_THROWS_AS(load_run_config("/nonexistent/avfc.json"), ConfigError);
  t::TempFile bad("avfc_bad", "{ not json");
  CHECK_THROWS_AS(load_run_config(bad.path()), ConfigError);
}

TEST_CASE("config: parse, serialize, parse is the identity") {
  for (const char* text : {
           R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25}, "model": {"rayleigh": {"scale": 1}}})",
           R"({"params": {"P": 3, "Lambda": 0.2, "sigma2": 2}, "model": {"discrete": [[2, 0.25], [0.5, 0.75]]},
               "configs": ["JAM_KNOWS"], "format": "json", "output": "x.json"})",
           R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25}, "model": {"density": {"lo": 0.1, "hi": 3, "pdf": [0, 1, 0.5]}},
               "lambda_grid": {"lo": 0.5, "hi": 4, "steps": 8}, "quantization_cells": 32})",
           R"({"params": {"P": 1, "Lambda": 2.5, "sigma2": 0.25}, "model": {"uniform": {"lo": 0.5, "hi": 1.5}},
               "sim": {"adversary": "gain_adaptive", "config": "NC", "trials": 7, "n": 100, "rate_bits": 0.05}})",
       }) {
    CAPTURE(text);
    const auto first = parse_run_config(json::parse(text));
    const auto serialized = to_json(first);
    const auto second = parse_run_config(serialized);
    CHECK(to_json(second) == serialized);
    CHECK(second.params == first.params);
    CHECK(second.configs == first.configs);
    CHECK(second.lambda_grid == first.lambda_grid);
    CHECK(second.sim == first.sim);
    CHECK(second.output == first.output);
    CHECK(second.format == first.format);
    CHECK(second.model.second_moment() == first.model.second_moment());
  }
}

TEST_CASE("report serialization uses the exact key set") {
  sim::SimReport r;
  r.trials = 10;
  r.errors = 3;
  r.error_rate = 0.3;
  r.warnings = {"w"};
  const auto j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"avg_jam_power", "avg_tx_power", "error_rate", "errors",
                                          "trials", "warnings", "wilson_halfwidth_95"});
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0, 10) == "0.3333333333");
  CHECK(format_number(2.0, 10) == "2");
  CHECK(format_number(1.5e-12, 10) == "1.5e-12");
}

TEST_CASE("compute: pass-through of capacity dispatch") {
  const auto r = run("compute", kPointMass);
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  REQUIRE(j.size() == 3);
  const auto m = FadingModel::point_mass(1.0);
  const ChannelParams p{1.0, 1.5, 0.25};
  CHECK(j[0]["config"] == "UU");
  CHECK(j[0]["value_bits"].get<double>() == cap_uu(p, m).value_bits);
  CHECK(j[1]["config"] == "BOTH_KNOW");
  CHECK(j[1]["value_bits"].get<double>() == 0.0);
  CHECK(j[1]["symmetrized"].get<bool>());
  CHECK(j[2]["value_bits"].get<double>() == doctest::Approx(0.326038).epsilon(1e-5));
  CHECK(j[2]["value_bits"].get<double>() == cap_nc(p, m).value_bits);

  const auto csv = run("compute", kPointMass, OutputFormat::Csv);
  REQUIRE(csv.code == kExitOk);
  CHECK(split_lines(csv.out).front() == "config,value_bits,symmetrized");
  CHECK(split_lines(csv.out)[2] == "BOTH_KNOW,0,true");
}

TEST_CASE("compute: policies are reported") {
  const auto r = run("compute", R"({"params": {"P": 1, "Lambda": 0.75, "sigma2": 0.25},
      "model": {"discrete": [[0.5, 0.5], [2, 0.5]]}, "configs": ["TX_KNOWS"]})");
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out)[0];
  CHECK(j["phi"]["values"][1].get<double>() == doctest::Approx(2.0));
  CHECK(j["diagnostics"]["lambda"].get<double>() == doctest::Approx(2.25));
}

TEST_CASE("exit codes") {
  CHECK(run("compute", "{").code == kExitConfigError);
  CHECK(run("compute", R"({"params": {"P": 1}})").code == kExitConfigError);
  const auto solver = run("compute", R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25},
      "model": {"discrete": [[0, 1]]}, "configs": ["TX_KNOWS"]})");
  CHECK(solver.code == kExitSolverError);
  CHECK(solver.err.find("solver error") != std::string::npos);
  CHECK(run("frobnicate", kPointMass).code == kExitConfigError);
  CHECK(run("simulate", kPointMass).code == kExitConfigError);  // no sim block
}

TEST_CASE("curve: Rayleigh thresholds on a coarse grid") {
  const auto r = run("curve", R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25},
      "model": {"rayleigh": {"scale": 1}},
      "lambda_grid": {"lo": 0.25, "hi": 4.75, "steps": 10}})");
  REQUIRE(r.code == kExitOk);
  const auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "lambda,C_UU,C_TX,C_JAM,C_BOTH,C_NC,C_GAVC");
  CHECK(r.out.find('\r') == std::string::npos);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto v = split_row(lines[i]);
    REQUIRE(v.size() == 7);
    const double lambda = v[0], uu = v[1], tx = v[2], jam = v[3], both = v[4], nc = v[5],
                 gavc = v[6];
    if (lambda >= 2.0) CHECK(jam == 0.0);
    if (lambda < 2.0) CHECK(jam > 0.0);
    if (lambda >= 1.0) CHECK(gavc == 0.0);
    // Rayleigh gains are unbounded, so BOTH_KNOW never drops to zero.
    CHECK(both > 0.0);
    const double tol = 1e-8;
    CHECK(jam <= uu + tol);
    CHECK(uu <= tx + tol);
    CHECK(both <= nc + tol);
    CHECK(nc <= tx + tol);
    CHECK(jam <= both + tol);
  }
}

TEST_CASE("curve: byte-identical across runs and worker counts") {
  const std::string cfg = R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25},
      "model": {"rayleigh": {"scale": 1}}, "quantization_cells": 64,
      "lambda_grid": {"lo": 0.5, "hi": 3, "steps": 6}})";
  const auto a = run("curve", cfg, std::nullopt, 1);
  const auto b = run("curve", cfg, std::nullopt, 3);
  const auto c = run("curve", cfg, std::nullopt, 1);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const auto j = run("curve", cfg, OutputFormat::Json, 2);
  REQUIRE(j.code == kExitOk);
  CHECK(json::parse(j.out).size() == 6);
}

TEST_CASE("curve: writes the configured output file") {
  t::TempFile out("avfc_curve");
  const std::string cfg = R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25},
      "model": {"discrete": [[1, 1]]}, "lambda_grid": {"lo": 0.5, "hi": 1.5, "steps": 3},
      "output": ")" + out.path() + R"("})";
  const auto r = run("curve", cfg);
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  const auto lines = split_lines(out.read());
  REQUIRE(lines.size() == 4);
  // Point mass: every knowledge configuration collapses to the same formula
  // except where symmetrization applies (Lambda >= P).
  const auto row = split_row(lines[1]);
  CHECK(row[1] == doctest::Approx(0.5 * std::log2(1.0 + 1.0 / 0.75)).epsilon(1e-9));
  CHECK(split_row(lines[2])[3] == 0.0);
}

TEST_CASE("symcheck") {
  auto field = [](const std::string& text) { return json::parse(text); };
  const auto rayleigh = run("symcheck", R"({"params": {"P": 1, "Lambda": 2.5, "sigma2": 0.25},
      "model": {"rayleigh": {"scale": 1}}})");
  REQUIRE(rayleigh.code == kExitOk);
  const auto r = field(rayleigh.out);
  CHECK(r["jam_knows"]["threshold"].get<double>() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r["jam_knows"]["symmetrizable"].get<bool>());
  CHECK(r["both_know"]["unbounded_support"].get<bool>());
  CHECK_FALSE(r["both_know"]["symmetrizable"].get<bool>());
  CHECK(r["both_know"]["sup_g2phi"].is_null());

  const auto point = field(run("symcheck", kPointMass).out);
  CHECK(point["jam_knows"]["threshold"].get<double>() == 1.0);
  CHECK(point["both_know"]["sup_g2phi"].get<double>() == 1.0);
  CHECK(point["both_know"]["symmetrizable"].get<bool>());

  const auto two = field(run("symcheck", R"({"params": {"P": 2, "Lambda": 1, "sigma2": 0.25},
      "model": {"discrete": [[0.5, 0.25], [2, 0.75]]}})").out);
  CHECK(two["E_G2_P"].get<double>() == doctest::Approx(2.0 * (0.25 * 0.25 + 0.75 * 4.0)));
  CHECK(two["both_know"]["sup_g2phi"].get<double>() == doctest::Approx(8.0));

  const auto csv = run("symcheck", kPointMass, OutputFormat::Csv);
  CHECK(csv.out.find("jam_knows.threshold,1") != std::string::npos);
}

TEST_CASE("simulate: pass-through") {
  const auto r = run("simulate", R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25},
      "model": {"discrete": [[1, 1]]},
      "sim": {"adversary": "none", "trials": 1, "n": 64, "rate_bits": 0.1, "seed": 3,
              "noiseless": true}})");
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["trials"] == 1);
  CHECK(j["errors"] == 0);
  CHECK(j["error_rate"].get<double>() == 0.0);
  CHECK(j["warnings"].empty());
}

TEST_CASE("simulate: sample configs and determinism") {
  for (const char* name : {"below_capacity.json", "mimic.json"}) {
    CommandOptions o;
    o.config_path = kConfigDir + "/" + name;
    std::ostringstream first, second, err;
    o.workers = 1;
    REQUIRE(cmd_simulate(o, first, err) == kExitOk);
    o.workers = 4;
    REQUIRE(cmd_simulate(o, second, err) == kExitOk);
    CHECK(first.str() == second.str());
    const auto j = json::parse(first.str());
    CHECK(j["trials"] == 500);
  }
}

TEST_CASE("simulate: policies follow the knowledge configuration") {
  const auto c = parse_run_config(json::parse(R"({"params": {"P": 1, "Lambda": 1, "sigma2": 0.25},
      "model": {"rayleigh": {"scale": 1}}, "quantization_cells": 32,
      "sim": {"config": "BOTH_KNOW", "adversary": "gain_adaptive", "trials": 4, "n": 32, "rate_bits": 0.125}})"));
  const auto s = make_sim_config(c);
  REQUIRE(s.phi.table);
  REQUIRE(s.psi);
  REQUIRE(s.psi->table);
  CHECK(s.phi.table->values.size() == 32);

  auto uu = c;
  uu.sim->config = KnowledgeConfig::UU;
  CHECK_THROWS_AS(make_sim_config(uu), ConfigError);
  uu.sim->adversary = sim::AdversaryKind::IidGaussian;
  const auto flat = make_sim_config(uu);
  CHECK_FALSE(flat.phi.table);
  CHECK(flat.phi.constant == 1.0);
}

TEST_CASE("worker cap from the environment") {
  ::setenv("AVFC_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  ::setenv("AVFC_THREADS", "0", 1);
  CHECK(worker_count() >= 1);
  ::setenv("AVFC_THREADS", "junk", 1);
  CHECK(worker_count() >= 1);
  ::unsetenv("AVFC_THREADS");
}
