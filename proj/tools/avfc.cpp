#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "avfc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Capacities and link simulation for Gaussian arbitrarily-varying fading channels"};
  app.require_subcommand(1, 1);

  avfc::CommandOptions options;
  std::string format;
  for (const auto* name : {"compute", "curve", "symcheck", "simulate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "JSON run configuration")->required();
    sub->add_option("--out", options.out, "output file (default: config \"output\" or stdout)");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : avfc::kExitConfigError;
  }
  if (!format.empty()) options.format = avfc::parse_format(format);
  return avfc::run_command(app.get_subcommands().front()->get_name(), options, std::cout,
                           std::cerr);
}
