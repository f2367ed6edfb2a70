#include "fpl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fpl/field_io.hpp"

namespace fpl {

ConfigError::ConfigError(int line, int column, const std::string& what)
    : FormatError("config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// [b, e) of s with surrounding blanks removed.
std::pair<std::size_t, std::size_t> trim_range(const std::string& s, std::size_t b, std::size_t e) {
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return {b, e};
}

bool valid_name(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

std::vector<IniSection> parse_ini(const std::string& text) {
  std::vector<IniSection> out(1);
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::size_t end = line.find('#');
    if (end == std::string::npos) end = line.size();
    const auto [b, e] = trim_range(line, 0, end);
    if (b == e) continue;
    const int col = static_cast<int>(b) + 1;
    if (line[b] == '[') {
      if (line[e - 1] != ']') throw ConfigError(ln, static_cast<int>(e), "missing ']' in section header");
      const auto [nb, ne] = trim_range(line, b + 1, e - 1);
      std::string name = line.substr(nb, ne - nb);
      if (!valid_name(name)) throw ConfigError(ln, static_cast<int>(nb) + 1, "invalid section name '" + name + "'");
      for (const auto& s : out)
        if (s.name == name) throw ConfigError(ln, col, "section [" + name + "] appears twice");
      out.push_back(IniSection{name, ln, {}});
      continue;
    }
    const std::size_t eq = line.find('=', b);
    if (eq == std::string::npos || eq >= e) throw ConfigError(ln, col, "expected 'key = value'");
    const auto [kb, ke] = trim_range(line, b, eq);
    const auto [vb, ve] = trim_range(line, eq + 1, e);
    IniEntry entry{line.substr(kb, ke - kb), line.substr(vb, ve - vb), ln, static_cast<int>(kb) + 1,
                   static_cast<int>(vb) + 1};
    if (!valid_name(entry.key)) throw ConfigError(ln, col, "invalid key '" + entry.key + "'");
    for (const auto& x : out.back().entries)
      if (x.key == entry.key) throw ConfigError(ln, col, "key '" + entry.key + "' repeated in this section");
    out.back().entries.push_back(std::move(entry));
  }
  return out;
}

namespace {

[[noreturn]] void fail(const IniEntry& e, const std::string& what) {
  throw ConfigError(e.line, e.value_column, e.key + " = " + e.value + ": " + what);
}

double to_double(const IniEntry& e, const std::string& tok) {
  double v = 0.0;
  const char* b = tok.data();
  const char* end = b + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  const auto r = std::from_chars(b, end, v);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) fail(e, "'" + tok + "' is not a finite number");
  return v;
}

long long to_integer(const IniEntry& e, const std::string& tok) {
  long long v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) fail(e, "'" + tok + "' is not an integer");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::vector<std::string> split_rows(const std::string& s) {
  std::vector<std::string> out;
  std::size_t b = 0;
  while (true) {
    const std::size_t p = s.find(';', b);
    const auto [rb, re] = trim_range(s, b, p == std::string::npos ? s.size() : p);
    out.push_back(s.substr(rb, re - rb));
    if (p == std::string::npos) break;
    b = p + 1;
  }
  return out;
}

double scalar(const IniEntry& e) {
  const auto t = split_ws(e.value);
  if (t.size() != 1) fail(e, "expected one number");
  return to_double(e, t[0]);
}

int integer(const IniEntry& e) {
  const auto t = split_ws(e.value);
  if (t.size() != 1) fail(e, "expected one integer");
  const long long v = to_integer(e, t[0]);
  if (v < -2147483647LL || v > 2147483647LL) fail(e, "integer out of range");
  return static_cast<int>(v);
}

std::vector<double> number_list(const IniEntry& e) {
  std::vector<double> out;
  for (const auto& t : split_ws(e.value)) out.push_back(to_double(e, t));
  return out;
}

std::vector<std::vector<double>> number_rows(const IniEntry& e) {
  std::vector<std::vector<double>> out;
  for (const auto& row : split_rows(e.value)) {
    std::vector<double> r;
    for (const auto& t : split_ws(row)) r.push_back(to_double(e, t));
    if (r.empty()) fail(e, "empty row");
    out.push_back(std::move(r));
  }
  return out;
}

bool boolean(const IniEntry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  fail(e, "expected true or false");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i]);
  return out;
}

std::string join_rows(const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) out += (i ? "; " : "") + join(rows[i]);
  return out;
}

const std::vector<std::string> kKinds{"solve-ac", "limit-s",   "solve-partition", "sweep-eps",
                                      "curvature", "perimeter", "check-sigma",     "render"};

using Setter = std::function<void(RunConfig&, const IniEntry&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"run",
       {{"kind",
         [](RunConfig& c, const IniEntry& e) {
           if (std::find(kKinds.begin(), kKinds.end(), e.value) == kKinds.end()) fail(e, "unknown run kind");
           c.kind = e.value;
         }},
        {"output",
         [](RunConfig& c, const IniEntry& e) {
           if (e.value.empty()) fail(e, "empty output directory");
           c.output = e.value;
         }},
        {"seed",
         [](RunConfig& c, const IniEntry& e) {
           std::uint64_t v = 0;
           const auto r = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
           if (r.ec != std::errc() || r.ptr != e.value.data() + e.value.size()) fail(e, "expected an unsigned integer");
           c.seed = v;
         }}}},
      {"lattice",
       {{"n",
         [](RunConfig& c, const IniEntry& e) {
           c.n = integer(e);
           if (c.n != 1 && c.n != 2) fail(e, "n must be 1 or 2");
         }},
        {"h",
         [](RunConfig& c, const IniEntry& e) {
           c.h = scalar(e);
           if (!(c.h > 0.0)) fail(e, "h must be positive");
         }},
        {"box", [](RunConfig& c, const IniEntry& e) { c.box = number_list(e); }},
        {"collar", [](RunConfig& c, const IniEntry& e) { c.collar = scalar(e); }},
        {"s",
         [](RunConfig& c, const IniEntry& e) {
           c.s = scalar(e);
           if (!(c.s > 0.0 && c.s < 0.5)) fail(e, "s must satisfy 0 < s < 1/2");
         }}}},
      {"phases",
       {{"wells", [](RunConfig& c, const IniEntry& e) { c.wells = number_rows(e); }},
        {"sigma", [](RunConfig& c, const IniEntry& e) { c.sigma = number_rows(e); }}}},
      {"solver",
       {{"eps",
         [](RunConfig& c, const IniEntry& e) {
           c.eps = scalar(e);
           if (!(c.eps > 0.0)) fail(e, "eps must be positive");
         }},
        {"max_iters",
         [](RunConfig& c, const IniEntry& e) {
           c.max_iters = integer(e);
           if (c.max_iters < 1) fail(e, "max_iters must be positive");
         }},
        {"tol", [](RunConfig& c, const IniEntry& e) { c.tol = scalar(e); }},
        {"memory",
         [](RunConfig& c, const IniEntry& e) {
           c.memory = integer(e);
           if (c.memory < 1) fail(e, "memory must be positive");
         }},
        {"init",
         [](RunConfig& c, const IniEntry& e) {
           if (e.value != "threshold" && e.value != "random") fail(e, "init must be threshold or random");
           c.init = e.value;
         }},
        {"restarts",
         [](RunConfig& c, const IniEntry& e) {
           c.restarts = integer(e);
           if (c.restarts < 1) fail(e, "restarts must be positive");
         }}}},
      {"anneal",
       {{"T0", [](RunConfig& c, const IniEntry& e) { c.T0 = scalar(e); }},
        {"cooling",
         [](RunConfig& c, const IniEntry& e) {
           c.cooling = scalar(e);
           if (!(c.cooling > 0.0 && c.cooling < 1.0)) fail(e, "cooling must lie in (0,1)");
         }},
        {"sweeps",
         [](RunConfig& c, const IniEntry& e) {
           c.sweeps = integer(e);
           if (c.sweeps < 0) fail(e, "sweeps must be non-negative");
         }}}},
      {"partition",
       {{"regime",
         [](RunConfig& c, const IniEntry& e) {
           if (e.value != "auto" && e.value != "nearly-homogeneous" && e.value != "STI3" && e.value != "SITI3")
             fail(e, "regime must be auto, nearly-homogeneous, STI3 or SITI3");
           c.regime = e.value;
         }},
        {"competitor", [](RunConfig& c, const IniEntry& e) { c.competitor = boolean(e); }}}},
      {"sweep",
       {{"cells",
         [](RunConfig& c, const IniEntry& e) {
           c.cells = integer(e);
           if (c.cells < 8) fail(e, "cells must be at least 8");
         }},
        {"eps",
         [](RunConfig& c, const IniEntry& e) {
           c.eps_list = number_list(e);
           for (double v : c.eps_list)
             if (!(v > 0.0)) fail(e, "eps values must be positive");
         }},
        {"theta_radius", [](RunConfig& c, const IniEntry& e) { c.theta_radius = scalar(e); }}}},
      {"limit",
       {{"s_values",
         [](RunConfig& c, const IniEntry& e) {
           c.s_values = number_list(e);
           for (double v : c.s_values)
             if (!(v > 0.0 && v < 0.5)) fail(e, "s values must satisfy 0 < s < 1/2");
         }},
        {"sets", [](RunConfig& c, const IniEntry& e) { c.sets = split_rows(e.value); }}}},
      {"curvature",
       {{"boundary",
         [](RunConfig& c, const IniEntry& e) {
           c.boundary.clear();
           for (const auto& r : number_rows(e)) {
             if (r.size() > 2) fail(e, "boundary points have one or two coordinates");
             c.boundary.push_back({r[0], r.size() > 1 ? r[1] : 0.0});
           }
         }},
        {"closed", [](RunConfig& c, const IniEntry& e) { c.closed = boolean(e); }},
        {"samples",
         [](RunConfig& c, const IniEntry& e) {
           c.samples = integer(e);
           if (c.samples < 1) fail(e, "samples must be positive");
         }}}},
      {"perimeter", {{"set", [](RunConfig& c, const IniEntry& e) { c.set = e.value; }}}},
      {"render", {{"input", [](RunConfig& c, const IniEntry& e) { c.input = e.value; }}}},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, const IniEntry*> seen;
  const auto sections = parse_ini(text);
  for (const auto& sec : sections) {
    if (sec.name.empty()) {
      if (!sec.entries.empty())
        throw ConfigError(sec.entries.front().line, sec.entries.front().column, "entry outside any section");
      continue;
    }
    if (sec.name == "exterior") {
      c.exterior.clear();
      for (const auto& e : sec.entries) c.exterior[e.key] = e.value;
      if (!c.exterior.count("pattern")) throw ConfigError(sec.line, 1, "[exterior] needs a pattern key");
      continue;
    }
    const auto& table = setters();
    const auto it = table.find(sec.name);
    if (it == table.end()) throw ConfigError(sec.line, 1, "unknown section [" + sec.name + "]");
    for (const auto& e : sec.entries) {
      const auto st = it->second.find(e.key);
      if (st == it->second.end()) throw ConfigError(e.line, e.column, "unknown key '" + e.key + "' in [" + sec.name + "]");
      st->second(c, e);
      seen[sec.name + "." + e.key] = &e;
    }
  }
  // Cross-field checks, reported at the key that fixes the offending shape.
  auto where = [&](const std::string& key) -> std::pair<int, int> {
    const auto it = seen.find(key);
    return it == seen.end() ? std::pair{1, 1} : std::pair{it->second->line, it->second->value_column};
  };
  if (c.box.size() != static_cast<std::size_t>(2 * c.n)) {
    const auto [l, col] = where("lattice.box");
    throw ConfigError(l, col, "box needs " + std::to_string(2 * c.n) + " numbers for n = " + std::to_string(c.n));
  }
  for (int k = 0; k < c.n; ++k)
    if (!(c.box[2 * k + 1] > c.box[2 * k])) {
      const auto [l, col] = where("lattice.box");
      throw ConfigError(l, col, "box bounds must increase");
    }
  if (!c.wells.empty()) {
    for (const auto& w : c.wells)
      if (w.size() != c.wells.front().size()) {
        const auto [l, col] = where("phases.wells");
        throw ConfigError(l, col, "wells must share one dimension");
      }
  }
  if (!c.sigma.empty()) {
    for (const auto& r : c.sigma)
      if (r.size() != c.sigma.size()) {
        const auto [l, col] = where("phases.sigma");
        throw ConfigError(l, col, "sigma must be a square matrix");
      }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream o;
  o << "[run]\nkind = " << c.kind << "\noutput = " << c.output << "\nseed = " << c.seed << "\n\n";
  o << "[lattice]\nn = " << c.n << "\nh = " << fmt(c.h) << "\nbox = " << join(c.box) << "\ncollar = " << fmt(c.collar)
    << "\ns = " << fmt(c.s) << "\n\n";
  if (!c.wells.empty() || !c.sigma.empty()) {
    o << "[phases]\n";
    if (!c.wells.empty()) o << "wells = " << join_rows(c.wells) << '\n';
    if (!c.sigma.empty()) o << "sigma = " << join_rows(c.sigma) << '\n';
    o << '\n';
  }
  o << "[exterior]\n";
  for (const auto& [k, v] : c.exterior) o << k << " = " << v << '\n';
  o << "\n[solver]\neps = " << fmt(c.eps) << "\nmax_iters = " << c.max_iters << "\ntol = " << fmt(c.tol)
    << "\nmemory = " << c.memory << "\ninit = " << c.init << "\nrestarts = " << c.restarts << "\n\n";
  o << "[anneal]\nT0 = " << fmt(c.T0) << "\ncooling = " << fmt(c.cooling) << "\nsweeps = " << c.sweeps << "\n\n";
  o << "[partition]\nregime = " << c.regime << "\ncompetitor = " << (c.competitor ? "true" : "false") << "\n\n";
  o << "[sweep]\ncells = " << c.cells << '\n';
  if (!c.eps_list.empty()) o << "eps = " << join(c.eps_list) << '\n';
  o << "theta_radius = " << fmt(c.theta_radius) << "\n\n";
  o << "[limit]\ns_values = " << join(c.s_values) << "\nsets = ";
  for (std::size_t i = 0; i < c.sets.size(); ++i) o << (i ? "; " : "") << c.sets[i];
  o << "\n\n[curvature]\n";
  if (!c.boundary.empty()) {
    o << "boundary = ";
    for (std::size_t i = 0; i < c.boundary.size(); ++i)
      o << (i ? "; " : "") << fmt(c.boundary[i][0]) << ' ' << fmt(c.boundary[i][1]);
    o << '\n';
  }
  o << "closed = " << (c.closed ? "true" : "false") << "\nsamples = " << c.samples << "\n\n";
  o << "[perimeter]\nset = " << c.set << "\n\n";
  if (!c.input.empty()) o << "[render]\ninput = " << c.input << '\n';
  return o.str();
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Box config_box(const RunConfig& c) {
  return c.n == 1 ? Box::interval(c.box[0], c.box[1]) : Box::rect(c.box[0], c.box[1], c.box[2], c.box[3]);
}

namespace {

std::string ext(const RunConfig& c, const std::string& key, const std::string& def) {
  const auto it = c.exterior.find(key);
  return it == c.exterior.end() ? def : it->second;
}

std::vector<double> ext_numbers(const RunConfig& c, const std::string& key, const std::string& def) {
  std::vector<double> out;
  const IniEntry e{key, ext(c, key, def), 0, 0, 0};
  for (const auto& t : split_ws(e.value)) out.push_back(to_double(e, t));
  return out;
}

int ext_label(const RunConfig& c, const std::string& key, int def, int phases) {
  const auto v = ext_numbers(c, key, std::to_string(def));
  require(v.size() == 1 && v[0] == std::floor(v[0]) && v[0] >= 1 && v[0] <= phases,
          "exterior: " + key + " must be a label in 1.." + std::to_string(phases));
  return static_cast<int>(v[0]) - 1;
}

}  // namespace

Pattern config_pattern(const RunConfig& c, int phases) {
  const std::string name = ext(c, "pattern", "step");
  if (name == "constant") return Pattern::constant(ext_label(c, "label", 1, phases), phases);
  if (name == "step") {
    const auto x0 = ext_numbers(c, "x0", "0");
    require(x0.size() == 1, "exterior: x0 must be one number");
    return Pattern::step(x0[0], ext_label(c, "left", 1, phases), ext_label(c, "right", 2, phases), phases);
  }
  if (name == "halfplane") {
    const auto p = ext_numbers(c, "point", "0 0");
    const auto nu = ext_numbers(c, "normal", "0 1");
    require(p.size() == 2 && nu.size() == 2, "exterior: point and normal need two numbers");
    const double len = std::hypot(nu[0], nu[1]);
    require(len > 0.0, "exterior: zero normal");
    return Pattern::halfplane(p[0], p[1], nu[0] / len, nu[1] / len, ext_label(c, "negative", 1, phases),
                              ext_label(c, "positive", 2, phases), phases);
  }
  if (name == "sectors") {
    const auto k = ext_numbers(c, "count", std::to_string(phases));
    const auto ctr = ext_numbers(c, "center", "0 0");
    const auto th = ext_numbers(c, "theta0", "0");
    require(k.size() == 1 && k[0] >= 1 && k[0] <= phases && k[0] == std::floor(k[0]),
            "exterior: count must be an integer in 1..phases");
    require(ctr.size() == 2 && th.size() == 1, "exterior: center needs two numbers, theta0 one");
    Pattern p = Pattern::sectors(static_cast<int>(k[0]), ctr[0], ctr[1], th[0]);
    p.classes = phases;
    return p;
  }
  if (name == "bands") {
    const auto cuts = ext_numbers(c, "cuts", "");
    const auto labs = ext_numbers(c, "labels", "");
    std::vector<int> cls;
    for (double v : labs) {
      require(v == std::floor(v) && v >= 1 && v <= phases, "exterior: band labels must lie in 1..phases");
      cls.push_back(static_cast<int>(v) - 1);
    }
    return Pattern::bands(cuts, cls, phases);
  }
  if (name == "file") {
    const std::string path = ext(c, "path", "");
    require(!path.empty(), "exterior: file pattern needs a path");
    auto loaded = std::make_shared<LabelField>(read_label_field(path).field);
    require(loaded->m <= phases, "exterior: file has more labels than phases");
    auto lat = loaded->lattice;
    return Pattern{phases,
                   [loaded, lat](double x, double y) {
                     // nearest cell of the stored lattice, clamped to its extent
                     const auto o = lat->origin();
                     const double h = lat->h();
                     const int ix = std::clamp(static_cast<int>(std::floor((x - o[0]) / h)), 0, lat->mx() - 1);
                     const int iy = lat->n() == 2
                                        ? std::clamp(static_cast<int>(std::floor((y - o[1]) / h)), 0, lat->my() - 1)
                                        : 0;
                     return (*loaded)[lat->index(ix, iy)];
                   },
                   "file"};
  }
  throw DomainError("exterior: unknown pattern '" + name + "'");
}

Wells config_wells(const RunConfig& c) {
  if (!c.wells.empty()) {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& w : c.wells) pts.push_back(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<long>(w.size())));
    return Wells(std::move(pts));
  }
  require(!c.sigma.empty(), "config: [phases] needs wells or sigma");
  const Embedding e = embed_sigma(config_sigma(c));
  require(e.embeddable && e.points.has_value(), "config: sigma is not embeddable, give wells explicitly");
  return *e.points;
}

SigmaMatrix config_sigma(const RunConfig& c) {
  if (!c.sigma.empty()) {
    const long m = static_cast<long>(c.sigma.size());
    Eigen::MatrixXd e(m, m);
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < m; ++j) e(i, j) = c.sigma[i][j];
    return SigmaMatrix(e);
  }
  require(!c.wells.empty(), "config: [phases] needs wells or sigma");
  return sigma_from_wells(config_wells(c));
}

SolverParams config_solver(const RunConfig& c) {
  SolverParams p;
  p.max_iters = c.max_iters;
  p.tol = c.tol;
  p.memory = c.memory;
  return p;
}

AnnealSchedule config_anneal(const RunConfig& c) {
  AnnealSchedule a;
  a.T0 = c.T0;
  a.cooling = c.cooling;
  a.sweeps = c.sweeps;
  a.seed = c.seed;
  return a;
}

std::optional<Regime> config_regime(const RunConfig& c) {
  if (c.regime == "nearly-homogeneous") return Regime::NearlyHomogeneous;
  if (c.regime == "STI3") return Regime::STI3;
  if (c.regime == "SITI3") return Regime::SITI3;
  return std::nullopt;
}

}  // namespace fpl
