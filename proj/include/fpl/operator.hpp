#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fpl {

// Symmetric positive semidefinite linear part of the discrete Euler-Lagrange
// operator, acting on one component of the unknowns.
class ACOperator {
 public:
  virtual ~ACOperator() = default;
  virtual std::size_t size() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> out) const = 0;
  virtual const std::vector<double>& diagonal() const = 0;
};

}  // namespace fpl
