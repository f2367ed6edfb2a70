#pragma once

// Run configuration files: a line-oriented "key = value" format with
// [section] headers and '#' comments. See docs/config.md for the grammar.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpl/acsolver.hpp"
#include "fpl/error.hpp"
#include "fpl/lattice.hpp"
#include "fpl/partsolver.hpp"
#include "fpl/wells.hpp"

namespace fpl {

class ConfigError : public FormatError {
 public:
  ConfigError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

struct IniEntry {
  std::string key, value;
  int line = 0, column = 0;  // of the key; the value starts at value_column
  int value_column = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
};

// Entries before the first header land in a section with an empty name.
std::vector<IniSection> parse_ini(const std::string& text);

struct RunConfig {
  std::string kind = "solve-ac";
  std::string output = "out";
  std::uint64_t seed = 42;

  // [lattice]
  int n = 1;
  double h = 1.0 / 512;
  std::vector<double> box{-1.0, 1.0};  // a b, or x0 x1 y0 y1
  double collar = -1.0;                // negative: half the box width
  double s = 0.25;

  // [phases]: wells (one point per row) or sigma (rows of the matrix)
  std::vector<std::vector<double>> wells;
  std::vector<std::vector<double>> sigma;

  // [exterior]: pattern name plus its raw keys (labels are 1-based)
  std::map<std::string, std::string> exterior{{"pattern", "step"}};

  // [solver]
  double eps = 1.0 / 64;
  int max_iters = 20000;
  double tol = -1.0;
  int memory = 12;
  std::string init = "threshold";
  int restarts = 3;

  // [anneal]
  double T0 = -1.0;
  double cooling = 0.95;
  int sweeps = 200;

  // [partition]
  std::string regime = "auto";
  bool competitor = false;

  // [sweep]
  int cells = 1024;
  std::vector<double> eps_list;
  double theta_radius = 0.0;

  // [limit]
  std::vector<double> s_values{0.40, 0.45, 0.48};
  std::vector<std::string> sets{"disc 0.5", "square 1"};

  // [curvature]: boundary points, a closed polygon when closed = true
  std::vector<std::array<double, 2>> boundary;
  bool closed = false;
  int samples = 16;

  // [perimeter]
  std::string set = "disc 1";

  // [render]
  std::string input;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize(const RunConfig& c);

// 64-bit FNV-1a of the text, 16 hex digits.
std::string config_hash(const std::string& text);

// Builders from a validated config.
Box config_box(const RunConfig& c);
Pattern config_pattern(const RunConfig& c, int phases);
Wells config_wells(const RunConfig& c);
SigmaMatrix config_sigma(const RunConfig& c);
SolverParams config_solver(const RunConfig& c);
AnnealSchedule config_anneal(const RunConfig& c);
std::optional<Regime> config_regime(const RunConfig& c);

}  // namespace fpl
