#pragma once

// Binary portable pixmaps of 2D fields on the box (collar cells are not
// drawn). Row 0 of the image is the top of the box.

#include <array>
#include <cstdint>
#include <string>

#include "fpl/lattice.hpp"
#include "fpl/wells.hpp"

namespace fpl {

// Fixed 16-colour palette; label k uses entry k mod 16.
const std::array<std::array<std::uint8_t, 3>, 16>& label_palette();

// P6 image of the labels.
void write_label_raster(const std::string& path, const LabelField& labels);
// P5 heat map of dist(u, wells), scaled by its maximum over the box
// (black where u sits on a well).
void write_distance_raster(const std::string& path, const VectorField& u, const Wells& wells);

}  // namespace fpl
