#include "ptdelta/grid.hpp"

#include <cmath>
#include <string>

#include "ptdelta/errors.hpp"

namespace ptdelta {

namespace {
bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(double x_min, double x_max, std::size_t n_bins)
    : x_min_(x_min), x_max_(x_max), n_bins_(n_bins) {
  if (!(x_max > x_min)) {
    throw DomainError("grid: x_max must exceed x_min");
  }
  if (!is_power_of_two(n_bins)) {
    throw DomainError("grid: n_bins must be a power of two >= 2, got " +
                      std::to_string(n_bins));
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_bins);
}

std::size_t Grid::nearest_bin(double x) const {
  if (x < x_min_ || x > x_max_) {
    throw DomainError("grid: position " + std::to_string(x) + " outside grid");
  }
  double idx = std::round((x - x_min_) / dx_);
  if (idx < 0.0) idx = 0.0;
  auto i = static_cast<std::size_t>(idx);
  if (i >= n_bins_) i = n_bins_ - 1;
  return i;
}

bool Grid::symmetric_about_origin() const {
  return std::abs(x_min_ + x_max_) <= dx_ * (1.0 + 1e-12);
}

}  // namespace ptdelta
