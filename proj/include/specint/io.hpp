#pragma once

// CSV writers for measures and sections. Numbers are printed with %.17g so
// output is bit-reproducible.

#include <specint/direct_integral.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace specint {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// lambda,mass_re,mass_im
template <class T>
void write_measure_csv(std::ostream& os, const AtomicMeasure<T>& m) {
  os << "lambda,mass_re,mass_im\n";
  for (const auto& a : m.atoms()) {
    double re = 0.0;
    double im = 0.0;
    if constexpr (std::is_same_v<T, Complex>) {
      re = a.mass.real();
      im = a.mass.imag();
    } else {
      re = a.mass;
    }
    os << format_number(a.lambda) << ',' << format_number(re) << ',' << format_number(im) << '\n';
  }
}

/// lambda,coord_index,value_re,value_im with 1-based canonical coordinates.
template <FieldScalar S>
void write_section_csv(std::ostream& os, const DirectIntegral<S>& di, const Section<S>& x) {
  di.check(x);
  os << "lambda,coord_index,value_re,value_im\n";
  for (std::size_t a = 0; a < di.atom_count(); ++a) {
    const auto& fiber = di.fibers()[a];
    for (Index k = 0; k < fiber.rank; ++k) {
      const S v = x.values[a](k);
      os << format_number(di.lambda(a)) << ',' << fiber.pivots[k] + 1 << ','
         << format_number(real_part(v)) << ',' << format_number(imag_part(v)) << '\n';
    }
  }
}

}  // namespace specint
