#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "ptdelta/grid.hpp"

namespace ptdelta {

using Complex = std::complex<double>;

/// Sampled complex wave function on a uniform grid. Immutable after
/// construction; operations on fields are pure functions.
class ComplexField {
 public:
  ComplexField(Grid grid, std::vector<Complex> values);

  const Grid& grid() const { return grid_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Linear interpolation of real and imaginary parts between bins.
  Complex value_at(double x) const;

  double max_abs() const;

  ComplexField scaled(Complex factor) const;

 private:
  Grid grid_;
  std::vector<Complex> values_;
};

}  // namespace ptdelta
