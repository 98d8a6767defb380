#include "ptdelta/complex_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptdelta/errors.hpp"

namespace ptdelta {

ComplexField::ComplexField(Grid grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_bins()) {
    throw DomainError("field: expected " + std::to_string(grid_.n_bins()) +
                      " values, got " + std::to_string(values_.size()));
  }
  for (const Complex& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError("field: non-finite sample");
    }
  }
}

Complex ComplexField::value_at(double x) const {
  if (!grid_.contains(x)) {
    throw DomainError("field: position outside grid");
  }
  const double t = (x - grid_.x_min()) / grid_.dx();
  const auto i = static_cast<std::size_t>(t);
  if (i + 1 >= values_.size()) {
    return values_.back();
  }
  const double w = t - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double ComplexField::max_abs() const {
  double m = 0.0;
  for (const Complex& v : values_) m = std::max(m, std::abs(v));
  return m;
}

ComplexField ComplexField::scaled(Complex factor) const {
  std::vector<Complex> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [factor](Complex v) { return factor * v; });
  return ComplexField(grid_, std::move(out));
}

}  // namespace ptdelta
