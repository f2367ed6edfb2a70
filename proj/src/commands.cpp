#include "fpl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

#include "fpl/curvature.hpp"
#include "fpl/field_io.hpp"
#include "fpl/harness.hpp"
#include "fpl/raster.hpp"

namespace fpl {

namespace {

namespace fs = std::filesystem;

struct Run {
  const RunConfig& cfg;
  const CommandContext& ctx;
  std::string command;
  fs::path dir;
  Manifest manifest;

  Run(const RunConfig& c, const CommandContext& x, std::string cmd) : cfg(c), ctx(x), command(std::move(cmd)) {
    dir = ctx.output.empty() ? fs::path(cfg.output) : fs::path(ctx.output);
    fs::create_directories(dir);
    manifest.command = command;
    manifest.config_hash = config_hash(ctx.config_text.empty() ? serialize(cfg) : ctx.config_text);
    manifest.seed = cfg.seed;
  }
  std::string path(const std::string& name) {
    manifest.outputs.push_back(name);
    return (dir / name).string();
  }
  std::ostream& log() const { return ctx.log ? *ctx.log : std::cout; }
  int finish(int code) {
    write_manifest((dir / "manifest.txt").string(), manifest);
    return code;
  }
};

LatticePtr config_lattice(const RunConfig& c) {
  const double width = c.box[1] - c.box[0];
  return build_lattice(c.n, c.h, config_box(c), c.collar > 0.0 ? c.collar : 0.5 * width);
}

std::string join_labels(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i] + 1);
  return out;
}

// "disc R", "square a", "rect a b", "interval L"
struct NamedSet {
  std::string name;
  std::shared_ptr<const Covariogram> g;
  double classical = 0.0;
};

NamedSet parse_set(const std::string& spec) {
  std::istringstream in(spec);
  std::string kind;
  in >> kind;
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  require(in.eof(), "set '" + spec + "': bad number");
  for (double a : v) require(a > 0.0, "set '" + spec + "': sizes must be positive");
  std::string name = spec;
  std::replace(name.begin(), name.end(), ' ', '_');
  if (kind == "disc" && v.size() == 1)
    return {name, std::make_shared<DiscCovariogram>(v[0]), 2.0 * std::numbers::pi * v[0]};
  if (kind == "square" && v.size() == 1) return {name, std::make_shared<RectCovariogram>(v[0], v[0]), 4.0 * v[0]};
  if (kind == "rect" && v.size() == 2)
    return {name, std::make_shared<RectCovariogram>(v[0], v[1]), 2.0 * (v[0] + v[1])};
  if (kind == "interval" && v.size() == 1) return {name, std::make_shared<IntervalCovariogram>(v[0]), 2.0};
  throw DomainError("set '" + spec + "': expected disc R, square a, rect a b or interval L");
}

}  // namespace

int cmd_solve_ac(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "solve-ac");
  auto lat = config_lattice(c);
  const Wells wells = config_wells(c);
  const int m = static_cast<int>(wells.m());
  auto kt = std::make_shared<const KernelTable>(lat, c.s, config_pattern(c, m));
  ACProblem pb = make_problem(kt, wells, c.eps, far_values_from_wells(wells, m));
  pb.params = config_solver(c);
  const Init init = c.init == "random" ? Init::random(c.seed, c.restarts) : Init::threshold();
  const ACSolution sol = solve_min(pb, init);
  write_field(run.path("solution.fld"), sol.u, c.s);
  write_trace_csv(run.path("trace.csv"), sol.trace);
  write_energy_csv(run.path("energy.csv"), sol.energy);
  run.log() << std::setprecision(12) << "solve-ac: converged=" << (sol.converged ? "true" : "false")
            << " iterations=" << sol.iterations << " residual=" << sol.residual << " energy=" << sol.energy.total
            << (sol.diagnostic.empty() ? "" : " (" + sol.diagnostic + ")") << '\n';
  return run.finish(sol.converged ? kExitOk : kExitNotConverged);
}

int cmd_solve_partition(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "solve-partition");
  auto lat = config_lattice(c);
  const SigmaMatrix sigma = config_sigma(c);
  const int m = sigma.m();
  const Pattern far = config_pattern(c, m);
  auto kt = std::make_shared<const KernelTable>(lat, c.s, far);
  PartitionProblem pb{kt, sigma, pattern_labels(lat, far, m), {}, config_anneal(c)};
  const PartitionResult res = solve_partition(pb);
  write_field(run.path("labels.fld"), res.labels, c.s);
  write_energy_csv(run.path("energy.csv"), res.energy);

  const NonInfiltrationCert cert = noninfiltration_constant(sigma, c.s, c.n, unit_ball_perimeter(c.n, c.s), config_regime(c));
  const auto checks = check_noninfiltration(res.labels, cert, lat->interior_mask());
  write_certificate_csv(run.path("certificate.csv"), cert, checks);
  run.log() << std::setprecision(12) << "solve-partition: energy=" << res.energy.total
            << " flip_stable=" << (res.flip_stable ? "true" : "false") << " certificate="
            << (cert.valid ? cert.formula + " (" + to_string(cert.regime) + ", phases " + join_labels(cert.phases) + ")"
                           : std::string("NoCertificate"))
            << " violations=" << count_violations(checks) << '\n';

  if (ctx.competitor || c.competitor) {
    require(c.n == 2, "competitor: needs n = 2");
    const CompetitorResult cr = siti_competitor_test(sigma, c.s, c.h);
    std::ofstream f(run.path("competitor.csv"));
    f << std::setprecision(17) << "s,i0,j0,k0,strip_halfwidth,flat,strip,margin\n"
      << c.s << ',' << cr.i0 + 1 << ',' << cr.j0 + 1 << ',' << cr.k0 + 1 << ',' << cr.strip_halfwidth << ','
      << cr.flat << ',' << cr.strip << ',' << cr.margin << '\n';
    run.log() << std::setprecision(12) << "competitor: flat=" << cr.flat << " strip=" << cr.strip
              << " margin=" << cr.margin << '\n';
  }
  return run.finish(res.flip_stable ? kExitOk : kExitNotConverged);
}

int cmd_sweep(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "sweep-eps");
  SweepConfig sc;
  sc.n = c.n;
  sc.s = c.s;
  sc.cells = c.cells;
  sc.box = config_box(c);
  sc.collar = c.collar;
  sc.wells = config_wells(c);
  sc.far = config_pattern(c, static_cast<int>(sc.wells.m()));
  sc.eps = c.eps_list.empty() ? dyadic_eps(sc.box, 3, 7) : c.eps_list;
  sc.theta_radius = c.theta_radius;
  sc.params = config_solver(c);
  const SweepResult r = sweep_eps(sc);
  write_sweep_csv(run.path("sweep.csv"), r);
  run.log() << std::setprecision(6) << "sweep-eps: runs=" << r.records.size() << " slope_linf=" << r.linf_fit.slope
            << " [" << r.linf_fit.ci_lo << ", " << r.linf_fit.ci_hi << "] slope_potential=" << r.potential_fit.slope
            << " [" << r.potential_fit.ci_lo << ", " << r.potential_fit.ci_hi << "]"
            << (r.complete ? "" : " incomplete: " + r.message) << '\n';
  return run.finish(r.complete ? kExitOk : kExitNotConverged);
}

int cmd_limit_s(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "limit-s");
  std::vector<std::shared_ptr<const Covariogram>> sets;
  std::vector<std::string> names;
  std::vector<double> classical;
  for (const auto& spec : c.sets) {
    NamedSet ns = parse_set(spec);
    sets.push_back(ns.g);
    names.push_back(ns.name);
    classical.push_back(ns.classical);
  }
  const LimitTable t = s_to_half_limit(sets, names, classical, c.s_values);
  write_limit_csv(run.path("limit.csv"), t);
  run.log() << std::setprecision(8);
  for (std::size_t k = 1; k < names.size(); ++k)
    run.log() << "limit-s: " << names[k] << "/" << names[0] << " extrapolated=" << t.extrapolated_ratio[k]
              << " classical=" << t.classical_ratio[k] << '\n';
  return run.finish(kExitOk);
}

int cmd_curvature(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "curvature");
  require(!c.boundary.empty(), "curvature: [curvature] boundary is empty");
  std::ofstream f(run.path("curvature.csv"));
  f << std::setprecision(17) << "x,y,H\n";
  std::size_t failed = 0;
  auto emit = [&](double x, double y, auto&& eval) {
    f << x << ',' << y << ',';
    try {
      f << eval(x, y) << '\n';
    } catch (const DomainError&) {
      f << "nan\n";
      ++failed;
    }
  };
  std::size_t points = 0;
  if (c.n == 1) {
    std::vector<double> b;
    for (const auto& p : c.boundary) b.push_back(p[0]);
    for (double x : b) {
      emit(x, 0.0, [&](double xx, double) { return nonlocal_mean_curvature_1d(b, xx, c.s); });
      ++points;
    }
  } else {
    require(c.boundary.size() >= (c.closed ? 3u : 2u), "curvature: too few boundary points");
    std::unique_ptr<Shape> shape;
    if (c.closed)
      shape = std::make_unique<Polygon>(c.boundary);
    else
      shape = std::make_unique<Polyline>(c.boundary);
    const std::size_t segs = c.closed ? c.boundary.size() : c.boundary.size() - 1;
    for (std::size_t k = 0; k < segs; ++k) {
      const auto& a = c.boundary[k];
      const auto& b = c.boundary[(k + 1) % c.boundary.size()];
      for (int j = 0; j < c.samples; ++j) {
        const double t = (j + 0.5) / c.samples;
        emit(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
             [&](double x, double y) { return nonlocal_mean_curvature(*shape, x, y, c.s); });
        ++points;
      }
    }
  }
  run.log() << "curvature: points=" << points << " failed=" << failed << '\n';
  return run.finish(kExitOk);
}

int cmd_perimeter(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "perimeter");
  std::istringstream in(c.set);
  std::string kind;
  in >> kind;
  std::ofstream f(run.path("perimeter.csv"));
  f << std::setprecision(17) << "set,s,perimeter,localized\n";
  if (kind == "file") {
    std::string file;
    int label = 1;
    in >> file >> label;
    const LoadedLabelField lf = read_label_field(file);
    require(label >= 1 && label <= lf.field.m, "perimeter: label out of range");
    const Mask E = mask_of_label(lf.field, label - 1);
    const MaskCovariogram g(*lf.field.lattice, E);
    const double P = perimeter_by_covariogram(g, c.s);
    const KernelTable kt(lf.field.lattice, c.s, Pattern::constant(0, 1));
    const double Pl = frac_perimeter(E, lf.field.lattice->interior_mask(), kt);
    f << "file_" << label << ',' << c.s << ',' << P << ',' << Pl << '\n';
    run.log() << std::setprecision(12) << "perimeter: global=" << P << " localized=" << Pl << '\n';
  } else {
    const NamedSet ns = parse_set(c.set);
    const double P = perimeter_by_covariogram(*ns.g, c.s);
    f << ns.name << ',' << c.s << ',' << P << ",\n";
    run.log() << std::setprecision(12) << "perimeter: " << ns.name << " P=" << P << '\n';
  }
  return run.finish(kExitOk);
}

int cmd_check_sigma(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "check-sigma");
  const SigmaMatrix sigma = config_sigma(c);
  const Embedding e = embed_sigma(sigma);
  std::ostringstream o;
  o << std::setprecision(10);
  o << "regime: ";
  for (std::size_t k = 0; k < sigma.regimes.size(); ++k) o << (k ? ", " : "") << to_string(sigma.regimes[k]);
  o << "\nq: " << sigma.q << '\n';
  if (sigma.alpha) {
    o << "alpha:";
    for (double a : *sigma.alpha) o << ' ' << a;
    o << '\n';
  }
  if (sigma.siti_pair) o << "siti pair: " << sigma.siti_pair->first + 1 << ' ' << sigma.siti_pair->second + 1 << '\n';
  o << "embeddable: " << (e.embeddable ? "yes" : "no") << '\n';
  if (e.embeddable && e.points) {
    o << "points {";
    for (std::size_t i = 0; i < e.points->m(); ++i) {
      const auto& p = (*e.points)[i];
      o << (i ? ", " : "");
      if (p.size() > 1) o << '(';
      for (long k = 0; k < p.size(); ++k) {
        const double v = std::abs(p[k]) < 1e-12 ? 0.0 : p[k];
        o << (k ? " " : "") << v;
      }
      if (p.size() > 1) o << ')';
    }
    o << "}\n";
  }
  run.log() << o.str();
  std::ofstream(run.path("check_sigma.txt")) << o.str();
  return run.finish(kExitOk);
}

int cmd_render(const RunConfig& c, const CommandContext& ctx) {
  Run run(c, ctx, "render");
  require(!c.input.empty(), "render: [render] input is empty");
  std::ifstream probe(c.input, std::ios::binary);
  if (!probe) throw FormatError("cannot open " + c.input);
  char head[16] = {};
  probe.read(head, sizeof head);
  const bool labels = head[12] == 1;
  if (labels) {
    const LoadedLabelField lf = read_label_field(c.input);
    write_label_raster(run.path("render.ppm"), lf.field);
  } else {
    const LoadedVectorField vf = read_vector_field(c.input);
    write_distance_raster(run.path("render.pgm"), vf.field, config_wells(c));
  }
  run.log() << "render: wrote " << run.manifest.outputs.back() << '\n';
  return run.finish(kExitOk);
}

int run_command(const std::string& command, const std::string& config_path, CommandContext ctx, std::ostream& err) {
  try {
    std::ifstream f(config_path);
    if (!f) throw FormatError("cannot open config " + config_path);
    std::ostringstream ss;
    ss << f.rdbuf();
    ctx.config_text = ss.str();
    const RunConfig cfg = parse_run_config(ctx.config_text);
    const std::string kind = command.empty() ? cfg.kind : command;
    if (kind == "solve-ac") return cmd_solve_ac(cfg, ctx);
    if (kind == "solve-partition") return cmd_solve_partition(cfg, ctx);
    if (kind == "sweep-eps") return cmd_sweep(cfg, ctx);
    if (kind == "limit-s") return cmd_limit_s(cfg, ctx);
    if (kind == "curvature") return cmd_curvature(cfg, ctx);
    if (kind == "perimeter") return cmd_perimeter(cfg, ctx);
    if (kind == "check-sigma") return cmd_check_sigma(cfg, ctx);
    if (kind == "render") return cmd_render(cfg, ctx);
    err << "error: unknown command '" << kind << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace fpl
