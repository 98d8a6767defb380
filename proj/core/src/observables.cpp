#include "ptdelta/observables.hpp"

#include <cmath>
#include <string>

#include "ptdelta/errors.hpp"

namespace ptdelta {

double norm_squared(const ComplexField& field) {
  double s = 0.0;
  for (const Complex& v : field.values()) s += std::norm(v);
  return s * field.grid().dx();
}

Complex inner_product(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid() == b.grid())) {
    throw DomainError("inner_product: fields live on different grids");
  }
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * a.grid().dx();
}

double probability_current(const ComplexField& field, double x,
                           std::span<const double> delta_positions) {
  const Grid& grid = field.grid();
  const double dx = grid.dx();
  for (double x0 : delta_positions) {
    if (std::abs(x - x0) < 2.0 * dx) {
      throw DomainError("probability_current: position " + std::to_string(x) +
                        " within two bins of the delta at " + std::to_string(x0));
    }
  }
  const std::size_t i = grid.nearest_bin(x);
  if (i == 0 || i + 1 >= grid.n_bins()) {
    throw DomainError("probability_current: position too close to the grid edge");
  }
  const Complex dpsi = (field[i + 1] - field[i - 1]) / (2.0 * dx);
  return 2.0 * std::imag(std::conj(field[i]) * dpsi);
}

double phase_at(const ComplexField& field, double x) {
  const Complex v = field.value_at(x);
  if (std::abs(v) <= 1e-12) {
    throw DomainError("phase_at: amplitude vanishes at x = " + std::to_string(x));
  }
  return std::arg(v);
}

ComplexField pt_reflect(const ComplexField& field) {
  const Grid& grid = field.grid();
  if (!grid.symmetric_about_origin()) {
    throw DomainError("pt_reflect: grid is not symmetric about the origin");
  }
  const std::size_t n = grid.n_bins();
  std::vector<Complex> out(n);
  out[0] = std::conj(field[0]);  // x_min has no mirror sample; periodic image
  for (std::size_t i = 1; i < n; ++i) {
    out[i] = std::conj(field[n - i]);
  }
  return ComplexField(grid, std::move(out));
}

}  // namespace ptdelta
