#include "fpl/raster.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include "fpl/error.hpp"

namespace fpl {

const std::array<std::array<std::uint8_t, 3>, 16>& label_palette() {
  static const std::array<std::array<std::uint8_t, 3>, 16> p{{{230, 25, 75},
                                                              {60, 180, 75},
                                                              {0, 130, 200},
                                                              {255, 225, 25},
                                                              {245, 130, 48},
                                                              {145, 30, 180},
                                                              {70, 240, 240},
                                                              {240, 50, 230},
                                                              {210, 245, 60},
                                                              {250, 190, 212},
                                                              {0, 128, 128},
                                                              {220, 190, 255},
                                                              {170, 110, 40},
                                                              {255, 250, 200},
                                                              {128, 0, 0},
                                                              {0, 0, 128}}};
  return p;
}

namespace {

void require_2d(const Lattice& L) {
  if (L.n() != 2) throw DomainError("render: 1D fields have no raster form; write a CSV profile instead");
}

template <class Pixel>
void write_pnm(const std::string& path, const Lattice& L, const char* magic, int channels, Pixel pixel) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  const int C = L.collar_cells();
  f << magic << '\n' << L.nx() << ' ' << L.ny() << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(L.nx()) * channels);
  for (int r = L.ny() - 1; r >= 0; --r) {
    for (int c = 0; c < L.nx(); ++c) pixel(L.index(c + C, r + C), &row[static_cast<std::size_t>(c) * channels]);
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace

void write_label_raster(const std::string& path, const LabelField& labels) {
  require_2d(*labels.lattice);
  const auto& pal = label_palette();
  write_pnm(path, *labels.lattice, "P6", 3, [&](std::size_t i, std::uint8_t* px) {
    const auto& col = pal[labels[i] % 16];
    std::copy(col.begin(), col.end(), px);
  });
}

void write_distance_raster(const std::string& path, const VectorField& u, const Wells& wells) {
  const Lattice& L = *u.lattice;
  require_2d(L);
  require(u.d == wells.d, "render: field and wells differ in dimension");
  std::vector<double> dist(L.size(), 0.0);
  double mx = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (L.interior(i)) {
      dist[i] = nearest_well(wells, u.cell(i)).first;
      mx = std::max(mx, dist[i]);
    }
  write_pnm(path, L, "P5", 1, [&](std::size_t i, std::uint8_t* px) {
    *px = mx > 0.0 ? static_cast<std::uint8_t>(std::clamp(255.0 * dist[i] / mx + 0.5, 0.0, 255.0)) : 0;
  });
}

}  // namespace fpl
