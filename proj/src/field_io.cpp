#include "fpl/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "fpl/error.hpp"

namespace fpl {

namespace {

using Bytes = std::vector<unsigned char>;

void put_u32(Bytes& b, std::size_t at, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b[at + k] = static_cast<unsigned char>(v >> (8 * k));
}
void put_u16(Bytes& b, std::size_t at, std::uint16_t v) {
  b[at] = static_cast<unsigned char>(v);
  b[at + 1] = static_cast<unsigned char>(v >> 8);
}
void put_f64(Bytes& b, std::size_t at, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) b[at + k] = static_cast<unsigned char>(bits >> (8 * k));
}
std::uint32_t get_u32(const Bytes& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[at + k]) << (8 * k);
  return v;
}
std::uint16_t get_u16(const Bytes& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
double get_f64(const Bytes& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[at + k]) << (8 * k);
  return std::bit_cast<double>(v);
}

Bytes header(const Lattice& L, std::uint32_t dm, std::uint32_t kind, double s) {
  Bytes b(64, 0);
  std::memcpy(b.data(), "FPL1", 4);
  put_u32(b, 4, static_cast<std::uint32_t>(L.n()));
  put_u32(b, 8, dm);
  put_u32(b, 12, kind);
  put_u32(b, 16, static_cast<std::uint32_t>(L.mx()));
  put_u32(b, 20, static_cast<std::uint32_t>(L.my()));
  put_f64(b, 24, L.h());
  put_f64(b, 32, s);
  put_f64(b, 40, L.origin()[0]);
  put_f64(b, 48, L.origin()[1]);
  put_u32(b, 56, static_cast<std::uint32_t>(L.collar_cells()));
  return b;
}

void write_bytes(const std::string& path, const Bytes& b) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw FormatError("write failed: " + path);
}

struct Parsed {
  Bytes data;
  LatticePtr lat;
  std::uint32_t dm, kind;
  double s;
};

Parsed parse(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  Parsed p;
  p.data.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  const Bytes& b = p.data;
  if (b.size() < 64 || std::memcmp(b.data(), "FPL1", 4) != 0) throw FormatError(path + ": not an FPL1 field file");
  const auto n = get_u32(b, 4);
  p.dm = get_u32(b, 8);
  p.kind = get_u32(b, 12);
  const auto mx = get_u32(b, 16), my = get_u32(b, 20);
  const double h = get_f64(b, 24);
  p.s = get_f64(b, 32);
  const double ox = get_f64(b, 40), oy = get_f64(b, 48);
  const auto C = get_u32(b, 56);
  if ((n != 1 && n != 2) || (n == 1 && my != 1) || mx <= 2 * C || my < 1 || !(h > 0.0) || C < 2)
    throw FormatError(path + ": inconsistent header");
  Box box = Box::interval(ox + C * h, ox + (mx - C) * h);
  if (n == 2) box = Box::rect(ox + C * h, ox + (mx - C) * h, oy + C * h, oy + (my - C) * h);
  p.lat = build_lattice(static_cast<int>(n), h, box, C * h);
  return p;
}

}  // namespace

void write_field(const std::string& path, const VectorField& u, double s) {
  const Lattice& L = *u.lattice;
  Bytes b = header(L, static_cast<std::uint32_t>(u.d), 0, s);
  const std::size_t off = b.size();
  b.resize(off + 8 * u.values.size());
  for (std::size_t k = 0; k < u.values.size(); ++k) put_f64(b, off + 8 * k, u.values[k]);
  write_bytes(path, b);
}

void write_field(const std::string& path, const LabelField& labels, double s) {
  const Lattice& L = *labels.lattice;
  Bytes b = header(L, static_cast<std::uint32_t>(labels.m), 1, s);
  const std::size_t off = b.size();
  b.resize(off + 2 * labels.labels.size());
  for (std::size_t k = 0; k < labels.labels.size(); ++k)
    put_u16(b, off + 2 * k, static_cast<std::uint16_t>(labels.labels[k] + 1));
  write_bytes(path, b);
}

LoadedVectorField read_vector_field(const std::string& path) {
  Parsed p = parse(path);
  if (p.kind != 0) throw FormatError(path + ": not a vector field");
  if (p.dm < 1 || p.dm > 64) throw FormatError(path + ": bad dimension");
  LoadedVectorField out{VectorField(p.lat, static_cast<int>(p.dm)), p.s};
  if (p.data.size() != 64 + 8 * out.field.values.size()) throw FormatError(path + ": truncated data");
  for (std::size_t k = 0; k < out.field.values.size(); ++k) out.field.values[k] = get_f64(p.data, 64 + 8 * k);
  return out;
}

LoadedLabelField read_label_field(const std::string& path) {
  Parsed p = parse(path);
  if (p.kind != 1) throw FormatError(path + ": not a label field");
  if (p.dm < 1 || p.dm > 16) throw FormatError(path + ": bad phase count");
  LoadedLabelField out{LabelField(p.lat, static_cast<int>(p.dm)), p.s};
  if (p.data.size() != 64 + 2 * out.field.labels.size()) throw FormatError(path + ": truncated data");
  for (std::size_t k = 0; k < out.field.labels.size(); ++k) {
    const auto v = get_u16(p.data, 64 + 2 * k);
    if (v < 1 || v > p.dm) throw FormatError(path + ": label outside 1..m");
    out.field.labels[k] = static_cast<std::uint16_t>(v - 1);
  }
  return out;
}

}  // namespace fpl
