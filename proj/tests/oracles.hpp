#pragma once

// Independent reference computations for the test suites. Everything here
// uses plain loops over std::vector so it shares no code path with the
// library under test.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Eigenpairs of the real symmetric 2x2 matrix [[a, b], [b, d]], ascending,
/// from the characteristic polynomial. Requires b != 0.
struct TwoByTwo {
  double lambda[2];
  double vector[2][2];  // vector[i] is the unit eigenvector of lambda[i]
};

inline TwoByTwo symmetric_2x2(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  TwoByTwo out{};
  out.lambda[0] = mean - radius;
  out.lambda[1] = mean + radius;
  for (int i = 0; i < 2; ++i) {
    // (A - lambda) v = 0  =>  v = (b, lambda - a)
    const double v0 = b;
    const double v1 = out.lambda[i] - a;
    const double norm = std::hypot(v0, v1);
    out.vector[i][0] = v0 / norm;
    out.vector[i][1] = v1 / norm;
  }
  return out;
}

inline Dense multiply(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

inline std::vector<double> apply(const Dense& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

/// Tridiagonal Jacobi matrix with constant diagonal a and off-diagonal b.
inline Dense jacobi(std::size_t n, double a, double b) {
  Dense m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = a;
    if (i + 1 < n) m[i][i + 1] = m[i + 1][i] = b;
  }
  return m;
}

/// <A^k x, x> by repeated matrix-vector products.
inline double power_moment(const Dense& a, const std::vector<double>& x, int k) {
  std::vector<double> v = x;
  for (int i = 0; i < k; ++i) v = oracle::apply(a, v);
  return dot(v, x);
}

/// Number of Dyck-like paths of length k on the half-line {0, 1, 2, ...}
/// that start and end at 0 with steps +-1: the closed-walk count behind
/// <J^k e_1, e_1> for the free Jacobi matrix.
inline std::uint64_t half_line_walks(int k) {
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(k) + 2, 0);
  ways[0] = 1;
  for (int step = 0; step < k; ++step) {
    std::vector<std::uint64_t> next(ways.size(), 0);
    for (std::size_t h = 0; h + 1 < ways.size(); ++h) {
      if (ways[h] == 0) continue;
      next[h + 1] += ways[h];
      if (h > 0) next[h - 1] += ways[h];
    }
    ways = std::move(next);
  }
  return ways[0];
}

inline double conj_of(double x) { return x; }
inline std::complex<double> conj_of(std::complex<double> z) { return std::conj(z); }

/// Lower Cholesky factor L of a positive definite matrix, G = L L^*, by
/// the textbook row-by-row recurrence.
template <class T>
std::vector<std::vector<T>> cholesky(const std::vector<std::vector<T>>& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<T>> l(n, std::vector<T>(n, T(0.0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      T sum = g[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * conj_of(l[j][k]);
      if (i == j) {
        l[i][i] = T(std::sqrt(std::real(sum)));
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  return l;
}

/// Solves the 2x2 system [[a, b], [c, d]] z = r by Cramer's rule.
inline std::pair<double, double> solve_2x2(double a, double b, double c, double d, double r0,
                                           double r1) {
  const double det = a * d - b * c;
  return {(r0 * d - b * r1) / det, (a * r1 - c * r0) / det};
}

/// Semicircle CDF by composite Simpson integration of sqrt(4 - t^2)/(2 pi).
inline double semicircle_cdf_numeric(double t, int panels = 20000) {
  if (t <= -2.0) return 0.0;
  if (t >= 2.0) return 1.0;
  const auto density = [](double s) { return std::sqrt(std::max(0.0, 4.0 - s * s)) / (2.0 * std::numbers::pi); };
  const double lo = -2.0;
  const double h = (t - lo) / panels;
  double sum = density(lo) + density(t);
  for (int i = 1; i < panels; ++i) sum += density(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Ramp c_k evaluated straight from its three-piece definition.
inline double ramp(double a, double b, int k, double t) {
  const double plateau = (t >= a && t <= b) ? 1.0 : 0.0;
  const double left = (t > a - 1.0 / k && t < a) ? 1.0 + k * (t - a) : 0.0;
  const double right = (t > b && t < b + 1.0 / k) ? 1.0 + k * (b - t) : 0.0;
  return plateau + left + right;
}

}  // namespace oracle
