#pragma once

// Shared aliases, scalar-field helpers, error types and the seeded
// test-vector generator used throughout specint.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace specint {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// The two supported fields: real and complex Hilbert spaces.
enum class ScalarField { real, complex };

template <class S>
concept FieldScalar = std::same_as<S, double> || std::same_as<S, Complex>;

template <class S>
inline constexpr bool is_complex_v = std::same_as<S, Complex>;

template <FieldScalar S>
constexpr ScalarField field_of() {
  return is_complex_v<S> ? ScalarField::complex : ScalarField::real;
}

inline const char* to_string(ScalarField f) {
  return f == ScalarField::real ? "real" : "complex";
}

template <FieldScalar S>
inline S conjugate(S v) {
  if constexpr (is_complex_v<S>) {
    return std::conj(v);
  } else {
    return v;
  }
}

template <FieldScalar S>
inline double real_part(S v) {
  if constexpr (is_complex_v<S>) {
    return v.real();
  } else {
    return v;
  }
}

template <FieldScalar S>
inline double imag_part(S v) {
  if constexpr (is_complex_v<S>) {
    return v.imag();
  } else {
    return 0.0;
  }
}

/// <x, y>, linear in x and conjugate-linear in y.
template <FieldScalar S>
inline S inner(const Vector<S>& x, const Vector<S>& y) {
  return y.dot(x);  // Eigen conjugates the left operand
}

template <class Derived>
inline double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Base of every error thrown by specint.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class AsymmetryError : public Error {
 public:
  AsymmetryError(const std::string& what, double asymmetry)
      : Error(what), asymmetry_(asymmetry) {}
  double asymmetry() const { return asymmetry_; }

 private:
  double asymmetry_;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

class PsdError : public Error {
 public:
  PsdError(const std::string& what, Index step, double residual)
      : Error(what), step_(step), residual_(residual) {}
  /// 1-based step of the section recursion that failed.
  Index step() const { return step_; }
  double residual() const { return residual_; }

 private:
  Index step_;
  double residual_;
};

class KindError : public Error {
 public:
  using Error::Error;
};

class MeasureMismatch : public Error {
 public:
  using Error::Error;
};

class ConditionError : public Error {
 public:
  ConditionError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class DegreeExhausted : public Error {
 public:
  DegreeExhausted(const std::string& what, double best_error)
      : Error(what), best_error_(best_error) {}
  double best_error() const { return best_error_; }

 private:
  double best_error_;
};

/// One row of a verification report.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

inline Check make_check(std::string name, double value, double bound) {
  return Check{std::move(name), value, bound, value <= bound};
}

/// SplitMix64 (Steele, Lea, Flood 2014). The sequence for a seed s is
/// z_i = mix(s + i * 0x9E3779B97F4A7C15), i = 1, 2, ...
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t state_;
};

/// Vector with i.i.d. components uniform on [-1,1) (real and imaginary
/// parts drawn in that order for complex fields), normalised to unit length.
template <FieldScalar S>
Vector<S> random_unit_vector(SplitMix64& rng, Index n) {
  Vector<S> v(n);
  for (Index i = 0; i < n; ++i) {
    if constexpr (is_complex_v<S>) {
      const double re = rng.symmetric();
      const double im = rng.symmetric();
      v(i) = Complex(re, im);
    } else {
      v(i) = rng.symmetric();
    }
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = S(1.0);
    return v;
  }
  return v / norm;
}

template <FieldScalar S>
Vector<S> basis_vector(Index n, Index j) {
  Vector<S> e = Vector<S>::Zero(n);
  e(j) = S(1.0);
  return e;
}

}  // namespace specint
