#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ptdelta/complex_field.hpp"

namespace ptdelta {

/// CSV layout: one header line, then rows "x,re_psi,im_psi" (one field) or
/// "x,re_psi1,im_psi1,re_psi2,..." (several fields on a shared grid).
/// Values are printed with 17 significant digits, so a write/read round trip
/// reproduces every double bit-exactly.

void write_fields_csv(std::ostream& out, const std::vector<ComplexField>& fields,
                      const std::vector<std::string>& names);
void write_field_csv(std::ostream& out, const ComplexField& field);

std::vector<ComplexField> read_fields_csv(std::istream& in);
ComplexField read_field_csv(std::istream& in);

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_double(double v);

}  // namespace ptdelta
