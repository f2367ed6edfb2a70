#pragma once

// Subcommands of the command-line tool. Each reads a RunConfig, writes its
// artifacts plus a manifest into the output directory and returns an exit
// code: 0 success, 1 config or validation error, 2 not converged, 3 internal
// error.

#include <iosfwd>
#include <string>

#include "fpl/config.hpp"

namespace fpl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitInternal = 3;

struct CommandContext {
  std::string config_text;  // hashed into the manifest
  std::string output;       // overrides the config's output directory when set
  bool competitor = false;
  std::ostream* log = nullptr;  // summary lines; null: std::cout
};

int cmd_solve_ac(const RunConfig& c, const CommandContext& ctx);
int cmd_solve_partition(const RunConfig& c, const CommandContext& ctx);
int cmd_sweep(const RunConfig& c, const CommandContext& ctx);
int cmd_limit_s(const RunConfig& c, const CommandContext& ctx);
int cmd_curvature(const RunConfig& c, const CommandContext& ctx);
int cmd_perimeter(const RunConfig& c, const CommandContext& ctx);
int cmd_check_sigma(const RunConfig& c, const CommandContext& ctx);
int cmd_render(const RunConfig& c, const CommandContext& ctx);

// Loads the config file, dispatches on `command` (or the config's kind when
// empty) and maps exceptions to exit codes, printing diagnostics to err.
int run_command(const std::string& command, const std::string& config_path, CommandContext ctx, std::ostream& err);

}  // namespace fpl
