#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "fpl/commands.hpp"
#include "fpl/config.hpp"
#include "fpl/field_io.hpp"
#include "fpl/raster.hpp"

using namespace fpl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fpl_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string config(const std::string& name) { return std::string(FPL_CONFIG_DIR) + "/" + name; }

int run(const std::string& cmd, const std::string& path, const fs::path& out, std::string* err_text = nullptr) {
  CommandContext ctx;
  ctx.output = out.string();
  std::ostringstream log, err;
  ctx.log = &log;
  const int code = run_command(cmd, path, ctx, err);
  if (err_text) *err_text = err.str();
  return code;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kPartition4 = R"([run]
kind = solve-partition
seed = 7

[lattice]
n = 1
h = 0.0625
box = -1 1
collar = 0.5
s = 0.3

[phases]
sigma = 0 1 2 3; 1 0 1 2; 2 1 0 1; 3 2 1 0

[exterior]
pattern = step
left = 1
right = 4

[anneal]
sweeps = 20
)";

}  // namespace

TEST_CASE("config round trip") {
  for (const char* name : {"solve_ac_1d.ini", "partition_hom_2d.ini", "partition_siti_2d.ini", "sweep_1d.ini",
                           "limit_s.ini", "curvature_halfplane.ini", "perimeter_square.ini", "check_sigma_411.ini"}) {
    const RunConfig c = load_run_config(config(name));
    const std::string text = serialize(c);
    CHECK(parse_run_config(text) == c);
    CHECK(serialize(parse_run_config(text)) == text);
  }
}

TEST_CASE("config errors carry line and column") {
  try {
    parse_run_config("[lattice]\ns = 0.6\n");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 5);
    const std::string msg = e.what();
    CHECK(msg.find("config:2:5") == 0);
    CHECK(msg.find("s must satisfy 0 < s < 1/2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_run_config("[nowhere]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[lattice]\nn = 1\nn = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[lattice\n"), ConfigError);
}

TEST_CASE("config hash") {
  const std::string h = config_hash("abc");
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(h == config_hash("abc"));
  CHECK(h != config_hash("abd"));
  // FNV-1a 64 of the empty string is the offset basis
  CHECK(config_hash("") == "cbf29ce484222325");
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("codes");
  CHECK(run("check-sigma", config("check_sigma_411.ini"), out) == kExitOk);
  const std::string report = slurp(out / "check_sigma.txt");
  CHECK(report.find("SITI3") != std::string::npos);
  CHECK(report.find("points {0, 2, 1}") != std::string::npos);
  CHECK(fs::exists(out / "manifest.txt"));

  write_text(out / "bad.ini", "[lattice]\ns = 0.6\n");
  std::string err;
  CHECK(run("solve-ac", (out / "bad.ini").string(), out, &err) == kExitConfig);
  CHECK(err.find("config:2:5") != std::string::npos);
  CHECK(run("solve-ac", (out / "missing.ini").string(), out) == kExitConfig);
  CHECK(run("no-such-command", config("check_sigma_411.ini"), out) == kExitConfig);

  write_text(out / "slow.ini",
             "[lattice]\nh = 0.015625\ncollar = 0.5\n[phases]\nwells = -1; 1\n[solver]\neps = 0.015625\nmax_iters = 2\n"
             "restarts = 1\n");
  CHECK(run("solve-ac", (out / "slow.ini").string(), out) == kExitNotConverged);
  CHECK(fs::exists(out / "manifest.txt"));
}

TEST_CASE("label rasters") {
  auto lat = build_lattice(2, 1.0 / 32, Box::rect(-1, 1, -1, 1), 0.25);
  LabelField L(lat, 3, 2);
  const fs::path out = scratch("raster");
  write_label_raster((out / "c.ppm").string(), L);
  const std::string img = slurp(out / "c.ppm");
  const std::string header = "P6\n64 64\n255\n";
  REQUIRE(img.size() == header.size() + 64 * 64 * 3);
  CHECK(img.substr(0, header.size()) == header);
  const auto& col = label_palette()[2];
  for (std::size_t p = header.size(); p < img.size(); p += 3) {
    CHECK(static_cast<std::uint8_t>(img[p]) == col[0]);
    CHECK(static_cast<std::uint8_t>(img[p + 1]) == col[1]);
    CHECK(static_cast<std::uint8_t>(img[p + 2]) == col[2]);
  }
  // the palette is fixed and its first entries are distinct
  CHECK(&label_palette() == &label_palette());
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) CHECK(label_palette()[a] != label_palette()[b]);

  auto line = build_lattice(1, 1.0 / 32, Box::interval(-1, 1), 0.25);
  CHECK_THROWS_AS(write_label_raster((out / "line.ppm").string(), LabelField(line, 2, 0)), DomainError);
}

TEST_CASE("render command") {
  const fs::path out = scratch("render");
  auto lat = build_lattice(2, 1.0 / 16, Box::rect(-1, 1, -1, 1), 0.25);
  LabelField L = pattern_labels(lat, Pattern::sectors(3, 0, 0, 0.0), 3);
  write_field((out / "labels.fld").string(), L, 0.25);
  write_text(out / "render.ini", "[render]\ninput = " + (out / "labels.fld").string() + "\n");
  CHECK(run("render", (out / "render.ini").string(), out) == kExitOk);
  CHECK(slurp(out / "render.ppm").substr(0, 3) == "P6\n");
  CHECK(fs::exists(out / "manifest.txt"));

  auto line = build_lattice(1, 1.0 / 16, Box::interval(-1, 1), 0.25);
  write_field((out / "line.fld").string(), LabelField(line, 2, 0), 0.25);
  write_text(out / "line.ini", "[render]\ninput = " + (out / "line.fld").string() + "\n");
  CHECK(run("render", (out / "line.ini").string(), out) == kExitConfig);
}

TEST_CASE("every command writes a manifest") {
  for (const char* name : {"check_sigma_411.ini", "limit_s.ini", "curvature_halfplane.ini", "perimeter_square.ini"}) {
    const fs::path out = scratch(std::string("manifest_") + name);
    CHECK(run("", config(name), out) == kExitOk);
    const std::string m = slurp(out / "manifest.txt");
    CHECK(m.find("config_hash = " + config_hash(slurp(config(name)))) != std::string::npos);
    CHECK(m.find("seed = ") != std::string::npos);
  }
}

TEST_CASE("general surface tensions get no certificate") {
  const fs::path out = scratch("general");
  write_text(out / "p.ini", kPartition4);
  const int code = run("solve-partition", (out / "p.ini").string(), out);
  CHECK((code == kExitOk || code == kExitNotConverged));
  const std::string cert = slurp(out / "certificate.csv");
  CHECK(cert.find("certificate,NoCertificate") != std::string::npos);
  CHECK(cert.find("regime,General") != std::string::npos);
}

TEST_CASE("same seed, same bytes") {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  write_text(a / "p.ini", kPartition4);
  run("solve-partition", (a / "p.ini").string(), a);
  run("solve-partition", (a / "p.ini").string(), b);
  for (const char* f : {"labels.fld", "energy.csv", "certificate.csv", "manifest.txt"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("solve-ac writes three artifacts and reruns bit-identically") {
  const std::string cfg =
      "[run]\nseed = 3\n[lattice]\nh = 0.015625\ncollar = 0.5\n[phases]\nwells = -1; 1\n[solver]\neps = 0.125\n"
      "init = random\nrestarts = 2\n";
  const fs::path a = scratch("ac_a"), b = scratch("ac_b");
  write_text(a / "ac.ini", cfg);
  CHECK(run("solve-ac", (a / "ac.ini").string(), a) == kExitOk);
  CHECK(run("solve-ac", (a / "ac.ini").string(), b) == kExitOk);
  for (const char* f : {"solution.fld", "trace.csv", "energy.csv", "manifest.txt"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "trace.csv").rfind("iter,energy,residual,step", 0) == 0);
}

TEST_CASE("partition runs: certificate and competitor") {
  const std::string base =
      "[lattice]\nn = 2\nh = 0.0625\nbox = -1 1 -1 1\ncollar = 0.25\ns = 0.45\n[anneal]\nsweeps = 30\n";
  const fs::path out = scratch("part");
  write_text(out / "hom.ini", base + "[phases]\nsigma = 0 1 1; 1 0 1; 1 1 0\n[exterior]\npattern = sectors\n");
  CHECK(run("solve-partition", (out / "hom.ini").string(), out / "hom") == kExitOk);
  CHECK(fs::exists(out / "hom" / "labels.fld"));
  const std::string cert = slurp(out / "hom" / "certificate.csv");
  CHECK(cert.find("regime,NearlyHomogeneous") != std::string::npos);
  CHECK(cert.find("certificate,NoCertificate") == std::string::npos);

  write_text(out / "siti.ini", base +
                                   "[phases]\nsigma = 0 4 1; 4 0 1; 1 1 0\n[exterior]\npattern = halfplane\nnegative = 2\n"
                                   "positive = 1\n[partition]\ncompetitor = true\n");
  CHECK(run("solve-partition", (out / "siti.ini").string(), out / "siti") == kExitOk);
  const std::string comp = slurp(out / "siti" / "competitor.csv");
  CHECK(comp.rfind("s,i0,j0,k0,strip_halfwidth,flat,strip,margin\n", 0) == 0);
}
