#pragma once

// Synthesis of fiber sections V_1(lambda), ..., V_N(lambda) from the Gram
// field, built one vector at a time: each new V_n is the Riesz
// representative of the functional V_j -> U_{j,n} on the span of the
// earlier vectors plus a fresh coordinate direction carrying the remaining
// norm.

#include <specint/spectral_measure.hpp>

#include <span>
#include <sstream>
#include <vector>

namespace specint {

/// Increments whose squared norm is at most this fraction of the running
/// trace are treated as zero.
inline constexpr double kZeroPivot = 1e-14;

/// Frame V_1, ..., V_m together with its Gram-Schmidt increments
/// V^_n = V_n - proj_{span(V_1..V_{n-1})} V_n. Zero increments are recorded
/// as absent; projection coefficients onto them are zero.
template <FieldScalar S>
class ProjectionFrame {
 public:
  explicit ProjectionFrame(Index dimension) : dim_(dimension) {}

  Index dimension() const { return dim_; }
  Index size() const { return static_cast<Index>(vectors_.size()); }
  const Vector<S>& vector(Index i) const { return vectors_[i]; }
  bool has_increment(Index i) const { return increments_[i].has_value(); }
  const Vector<S>& increment(Index i) const { return *increments_[i]; }
  /// Coefficients w with V^_i = sum_{j <= i} w_j V_j.
  const Vector<S>& expansion(Index i) const { return expansions_[i]; }
  Index rank() const { return rank_; }

  /// Coefficients a_1..a_m with proj Y = sum a_j V_j, by the recursion
  /// a_n = <Y, V^_n> / ||V^_n||^2 (zero when V^_n is absent), then
  /// recursing on Y - a_n V_n over the first n - 1 vectors.
  std::vector<S> coefficients(const Vector<S>& y) const {
    Vector<S> rest = y;
    return coefficients_and_residual(rest);
  }

  Vector<S> project(const Vector<S>& y) const {
    Vector<S> rest = y;
    coefficients_and_residual(rest);
    return y - rest;
  }

  /// Appends V, computing its increment and applying the zero guard
  /// ||V^|| <= kZeroPivot ||V||.
  void push(const Vector<S>& v) {
    check(v);
    Vector<S> rest = v;
    const auto a = coefficients_and_residual(rest);
    const double vn = v.norm();
    if (vn == 0.0 || rest.norm() <= kZeroPivot * vn) {
      append(v, std::nullopt, {});
    } else {
      append(v, std::move(rest), a);
    }
  }

  /// Appends V with a caller-supplied increment (absent when zero); the
  /// expansion comes from projecting V - V^ onto the current frame.
  void push(const Vector<S>& v, std::optional<Vector<S>> increment) {
    check(v);
    if (!increment) {
      append(v, std::nullopt, {});
      return;
    }
    const Vector<S> in_span = v - *increment;
    append(v, std::move(increment), coefficients(in_span));
  }

 private:
  void check(const Vector<S>& v) const {
    if (v.size() != dim_) throw DimensionError("ProjectionFrame: vector has wrong dimension");
  }

  std::vector<S> coefficients_and_residual(Vector<S>& rest) const {
    if (rest.size() != dim_) throw DimensionError("ProjectionFrame: vector has wrong dimension");
    std::vector<S> a(vectors_.size(), S(0.0));
    for (Index n = size() - 1; n >= 0; --n) {
      if (!increments_[n]) continue;
      const Vector<S>& inc = *increments_[n];
      a[n] = inner<S>(rest, inc) / inc.squaredNorm();
      rest -= a[n] * vectors_[n];
    }
    return a;
  }

  void append(const Vector<S>& v, std::optional<Vector<S>> increment,
              const std::vector<S>& coefficients) {
    const Index n = size();
    Vector<S> w = Vector<S>::Zero(n + 1);
    if (increment) {
      for (Index j = 0; j < n; ++j) w(j) = -coefficients[j];
      w(n) = S(1.0);
      ++rank_;
    }
    vectors_.push_back(v);
    increments_.push_back(std::move(increment));
    expansions_.push_back(std::move(w));
  }

  Index dim_;
  Index rank_ = 0;
  std::vector<Vector<S>> vectors_;
  std::vector<std::optional<Vector<S>>> increments_;
  std::vector<Vector<S>> expansions_;
};

/// Coefficients a_j with proj_{span V} Y = sum_j a_j V_j.
template <FieldScalar S>
std::vector<S> measurable_projection(const Vector<S>& y, std::span<const Vector<S>> frame) {
  ProjectionFrame<S> f(y.size());
  for (const auto& v : frame) f.push(v);
  return f.coefficients(y);
}

/// Sections at one atom. V_j lives on the first j canonical coordinates and
/// only the pivot coordinates (where the recursion added a new direction)
/// can be nonzero, so V_j is stored as column j of a rank x N matrix.
template <FieldScalar S>
struct FiberFrame {
  double lambda = 0.0;
  Index rank = 0;
  std::vector<Index> pivots;  // 0-based canonical coordinates, increasing
  Matrix<S> coefficients;     // rank x N

  Index size() const { return coefficients.cols(); }

  /// V_{j+1}(lambda) as a length-N coordinate vector.
  Vector<S> vector(Index j) const {
    Vector<S> v = Vector<S>::Zero(size());
    for (Index k = 0; k < rank; ++k) v(pivots[k]) = coefficients(k, j);
    return v;
  }

  /// <V_j, V_l> for all j, l.
  Matrix<S> gram() const { return (coefficients.adjoint() * coefficients).transpose(); }
};

/// Runs the section recursion on a PSD Gram matrix G:
///   V_n = R(T_n) + sqrt(G_nn - ||T_n||^2) g_n,
/// where R(T_n) represents V_j -> G_{j,n} on span(V_1..V_{n-1}).
/// Residuals in [-tol_psd, kZeroPivot * trace] become zero; residuals below
/// -tol_psd throw PsdError.
template <FieldScalar S>
FiberFrame<S> gram_to_sections(const Matrix<S>& g, double tol_psd, double lambda = 0.0) {
  const Index n = g.rows();
  if (g.cols() != n) throw DimensionError("gram_to_sections: Gram matrix must be square");
  const double herm = max_abs(g - g.adjoint());
  if (herm > 1e-12 * (1.0 + max_abs(g))) {
    throw ValidationError("gram_to_sections: Gram matrix is not Hermitian");
  }

  ProjectionFrame<S> frame(n);
  std::vector<Index> increment_ids;
  double trace = 0.0;
  for (Index col = 0; col < n; ++col) {
    const double diag = real_part(g(col, col));
    trace += diag;

    Vector<S> r = Vector<S>::Zero(n);
    for (Index i : increment_ids) {
      const Vector<S>& w = frame.expansion(i);
      S t_value = S(0.0);
      for (Index j = 0; j <= i; ++j) t_value += w(j) * g(j, col);
      const Vector<S>& inc = frame.increment(i);
      r += (conjugate(t_value) / inc.squaredNorm()) * inc;
    }

    double residual = diag - r.squaredNorm();
    if (residual < -tol_psd) {
      std::ostringstream msg;
      msg << "gram_to_sections: Gram matrix is not PSD at step " << col + 1 << " (residual "
          << residual << " < -" << tol_psd << ")";
      throw PsdError(msg.str(), col + 1, residual);
    }
    if (residual <= kZeroPivot * trace) residual = 0.0;

    Vector<S> v = r;
    if (residual > 0.0) {
      const double height = std::sqrt(residual);
      v(col) += height;
      Vector<S> inc = Vector<S>::Zero(n);
      inc(col) = height;
      frame.push(v, std::move(inc));
      increment_ids.push_back(col);
    } else {
      frame.push(v, std::nullopt);
    }
  }

  FiberFrame<S> out;
  out.lambda = lambda;
  out.rank = static_cast<Index>(increment_ids.size());
  out.pivots = increment_ids;
  out.coefficients.resize(out.rank, n);
  for (Index j = 0; j < n; ++j) {
    const Vector<S>& v = frame.vector(j);
    for (Index k = 0; k < out.rank; ++k) out.coefficients(k, j) = v(out.pivots[k]);
  }
  return out;
}

/// One fiber per retained atom, in ascending lambda.
template <FieldScalar S>
std::vector<FiberFrame<S>> build_fibers(const GramField<S>& gf, double psd_relative = 1e-10) {
  std::vector<FiberFrame<S>> fibers;
  fibers.reserve(gf.size());
  for (std::size_t a = 0; a < gf.size(); ++a) {
    const Matrix<S> u = gf.matrix(a);
    const double tol = psd_relative * std::abs(real_part(u.trace()));
    fibers.push_back(gram_to_sections(u, tol, gf.lambda(a)));
  }
  return fibers;
}

}  // namespace specint
