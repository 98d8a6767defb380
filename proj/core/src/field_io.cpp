#include "ptdelta/field_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "ptdelta/errors.hpp"

namespace ptdelta {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_fields_csv(std::ostream& out, const std::vector<ComplexField>& fields,
                      const std::vector<std::string>& names) {
  if (fields.empty()) {
    throw DomainError("write_fields_csv: no fields");
  }
  const Grid& grid = fields.front().grid();
  for (const auto& f : fields) {
    if (!(f.grid() == grid)) {
      throw DomainError("write_fields_csv: fields live on different grids");
    }
  }
  out << "x";
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const std::string tag = k < names.size() ? names[k] : "psi" + std::to_string(k + 1);
    out << ",re_" << tag << ",im_" << tag;
  }
  out << "\n";
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    out << format_double(grid.x(i));
    for (const auto& f : fields) {
      out << ',' << format_double(f[i].real()) << ',' << format_double(f[i].imag());
    }
    out << "\n";
  }
}

void write_field_csv(std::ostream& out, const ComplexField& field) {
  write_fields_csv(out, {field}, {"psi"});
}

std::vector<ComplexField> read_fields_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DomainError("read_fields_csv: empty stream");
  }
  std::vector<double> xs;
  std::vector<std::vector<Complex>> cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) {
      vals.push_back(std::stod(cell));
    }
    if (vals.size() < 3 || vals.size() % 2 == 0) {
      throw DomainError("read_fields_csv: malformed row '" + line + "'");
    }
    const std::size_t nf = (vals.size() - 1) / 2;
    if (cols.empty()) cols.resize(nf);
    if (cols.size() != nf) {
      throw DomainError("read_fields_csv: inconsistent column count");
    }
    xs.push_back(vals[0]);
    for (std::size_t k = 0; k < nf; ++k) {
      cols[k].emplace_back(vals[1 + 2 * k], vals[2 + 2 * k]);
    }
  }
  if (xs.size() < 2) {
    throw DomainError("read_fields_csv: need at least two rows");
  }
  const double dx = xs[1] - xs[0];
  const Grid grid(xs.front(), xs.front() + dx * static_cast<double>(xs.size()),
                  xs.size());
  std::vector<ComplexField> out;
  out.reserve(cols.size());
  for (auto& c : cols) out.emplace_back(grid, std::move(c));
  return out;
}

ComplexField read_field_csv(std::istream& in) {
  auto fields = read_fields_csv(in);
  if (fields.size() != 1) {
    throw DomainError("read_field_csv: expected exactly one field column pair");
  }
  return std::move(fields.front());
}

}  // namespace ptdelta
