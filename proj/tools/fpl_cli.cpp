#include <CLI11.hpp>
#include <iostream>

#include "fpl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fractional Allen-Cahn and nonlocal partition experiments"};
  app.require_subcommand(1);
  std::string config;
  fpl::CommandContext ctx;
  bool serial = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve-ac", "minimize the fractional Allen-Cahn energy"},
      {"solve-partition", "anneal a nonlocal minimal partition and check non-infiltration"},
      {"sweep-eps", "eps -> 0 sweep with rate fits"},
      {"limit-s", "s -> 1/2 perimeter ratios"},
      {"curvature", "nonlocal mean curvature along a boundary"},
      {"perimeter", "fractional perimeter of a set"},
      {"check-sigma", "classify a surface-tension matrix and embed it"},
      {"render", "raster image of a 2D field"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", ctx.output, "output directory (overrides the config)");
    sub->add_flag("--serial", serial, "bit-reproducible mode (all runs are serial)");
    if (name == "solve-partition") sub->add_flag("--competitor", ctx.competitor, "also run the SITI competitor test");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fpl::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return fpl::run_command(command, config, ctx, std::cerr);
}
