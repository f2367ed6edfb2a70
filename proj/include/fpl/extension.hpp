#pragma once

// Fractional Poisson extension of a lattice field into the upper half-space,
// sampled on horizontal levels, and the monotonicity densities built from it.

#include <optional>
#include <vector>

#include "fpl/kernel.hpp"
#include "fpl/lattice.hpp"
#include "fpl/nonlocal.hpp"
#include "fpl/wells.hpp"

namespace fpl {

struct ExtensionSlab {
  LatticePtr lattice;
  double s = 0.25;
  int d = 1;
  // z[0] = 0 holds the trace u itself; z[1] < ... < z[K] are the levels.
  std::vector<double> z;
  std::vector<double> values;  // (level * cells + cell) * d + component

  std::size_t levels() const { return z.size(); }
  const double* at(std::size_t level, std::size_t cell) const {
    return values.data() + (level * lattice->size() + cell) * d;
  }
  double* at(std::size_t level, std::size_t cell) { return values.data() + (level * lattice->size() + cell) * d; }
};

// z_1 = z1, z_{k+1} = ratio * z_k until z_K >= z_max.
std::vector<double> geometric_levels(double z1, double ratio, double z_max);
// h/4, ratio 1.25, up to twice the largest radius of interest.
std::vector<double> default_z_levels(double h, double r_max);

// u^e(x_i, z) for every cell and level: cell masses of the Poisson kernel
// against u, far masses against the far values of `far`, renormalized per
// cell to total mass one.
ExtensionSlab poisson_extend(const VectorField& u, double s, const std::vector<double>& z_levels, const Pattern& far,
                             const FarValues& far_values);

// (delta_s / 2) int z^a |grad v|^2 over the sampled slab restricted to
// |x - x0|_inf <= half_width.
double extension_energy(const ExtensionSlab& slab, double x0, double y0, double half_width);

// r^{-(n-2s)} [ (delta_s/2) int_{B_r^+(x0)} z^a |grad v|^2 + eps^{-2s} int_{D_r(x0)} W(v) ];
// the potential term is dropped when eps or W is absent.
double density_theta(const ExtensionSlab& slab, std::optional<double> eps, double x0, double y0, double r,
                     const Potential* W = nullptr);

}  // namespace fpl
