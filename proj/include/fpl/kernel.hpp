#pragma once

// Cell-averaged weights of the kernel |x - y|^{-(n+2s)} on a lattice, and
// per-cell tail integrals over everything beyond the collar split by the
// exterior pattern's classes.

#include <cstddef>
#include <vector>

#include "fpl/lattice.hpp"

namespace fpl {

// Average of |x - y|^{-(n+2s)} over a pair of unit cells at integer offset.
double unit_weight_1d(long k, double s);
double unit_weight_2d(long ox, long oy, double s);

// Integral of |y|^{-(n+2s)} over |y| > R.
double radial_tail(int n, double s, double R);

class KernelTable {
 public:
  KernelTable(LatticePtr lat, double s, Pattern far);

  const Lattice& lattice() const { return *lat_; }
  const LatticePtr& lattice_ptr() const { return lat_; }
  double s() const { return s_; }
  // h^{-(n+2s)}: weights are unit-lattice values times this factor.
  double scale() const { return scale_; }

  double w(long dx, long dy = 0) const {
    return scale_ * unit_[static_cast<std::size_t>(dx < 0 ? -dx : dx) +
                          static_cast<std::size_t>(lat_->mx()) * static_cast<std::size_t>(dy < 0 ? -dy : dy)];
  }
  double w_between(std::size_t i, std::size_t j) const {
    return w(static_cast<long>(lat_->ix(i)) - lat_->ix(j), static_cast<long>(lat_->iy(i)) - lat_->iy(j));
  }
  // Unit-lattice weights indexed |dx| + mx*|dy|; entry 0 (the cell itself) is 0.
  const std::vector<double>& unit_weights() const { return unit_; }

  const Pattern& far() const { return far_; }
  int classes() const { return far_.classes; }
  // Cell average over cell i of the kernel integrated over the far region of class q.
  double tail(std::size_t i, int q) const { return tails_[i * far_.classes + q]; }
  double tail_total(std::size_t i) const;
  // Sum of w over all other lattice cells.
  double row_sum(std::size_t i) const { return rows_[i]; }

 private:
  LatticePtr lat_;
  double s_;
  double scale_;
  Pattern far_;
  std::vector<double> unit_;
  std::vector<double> tails_;
  std::vector<double> rows_;
};

KernelTable build_kernel(const LatticePtr& lat, double s, const Pattern& far = Pattern::constant(0, 1));

}  // namespace fpl
