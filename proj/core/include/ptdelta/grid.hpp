#pragma once

#include <cstddef>

namespace ptdelta {

/// Uniform 1D grid with a power-of-two bin count (FFT propagation layout).
/// Sample points are x_i = x_min + i*dx for i in [0, n_bins); x_max is the
/// periodic image of x_min and carries no sample of its own.
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_bins);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t n_bins() const { return n_bins_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }

  double x(std::size_t i) const { return x_min_ + dx_ * static_cast<double>(i); }
  std::size_t nearest_bin(double x) const;
  bool contains(double x) const { return x >= x_min_ && x < x_max_; }

  /// True when the grid is symmetric about the origin up to one bin.
  bool symmetric_about_origin() const;

  bool operator==(const Grid&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_bins_;
  double dx_;
};

}  // namespace ptdelta
