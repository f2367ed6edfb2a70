#pragma once

// ".fld" files: a 64-byte little-endian header followed by row-major cell
// data (f64 vectors or u16 labels stored 1-based).
//
//  0  magic "FPL1"        24  h (f64)
//  4  n (u32)             32  s (f64)
//  8  d or m (u32)        40  origin x (f64)
// 12  kind: 0 vec, 1 lab  48  origin y (f64)
// 16  cells along x       56  collar cells (u32)
// 20  cells along y       60  reserved, zero

#include <string>

#include "fpl/lattice.hpp"

namespace fpl {

struct LoadedVectorField {
  VectorField field;
  double s = 0.0;
};

struct LoadedLabelField {
  LabelField field;
  double s = 0.0;
};

void write_field(const std::string& path, const VectorField& u, double s);
void write_field(const std::string& path, const LabelField& labels, double s);
LoadedVectorField read_vector_field(const std::string& path);
LoadedLabelField read_label_field(const std::string& path);

}  // namespace fpl
