#pragma once

// The direct integral of the fiber spaces over the atomic spectral measure,
// the isometry U(e_j) = V_j, multiplication operators and range projection.

#include <specint/sections.hpp>

#include <Eigen/Eigenvalues>

#include <functional>
#include <vector>

namespace specint {

/// A section: one vector per atom, in that fiber's pivot coordinates.
template <FieldScalar S>
struct Section {
  std::vector<Vector<S>> values;

  Section& operator+=(const Section& other) {
    if (other.values.size() != values.size()) throw MeasureMismatch("sections differ in atoms");
    for (std::size_t a = 0; a < values.size(); ++a) values[a] += other.values[a];
    return *this;
  }
  Section& operator-=(const Section& other) {
    if (other.values.size() != values.size()) throw MeasureMismatch("sections differ in atoms");
    for (std::size_t a = 0; a < values.size(); ++a) values[a] -= other.values[a];
    return *this;
  }
  Section& operator*=(S scale) {
    for (auto& v : values) v *= scale;
    return *this;
  }
  friend Section operator+(Section lhs, const Section& rhs) { return lhs += rhs; }
  friend Section operator-(Section lhs, const Section& rhs) { return lhs -= rhs; }
  friend Section operator*(S scale, Section x) { return x *= scale; }
};

template <FieldScalar S>
class DirectIntegral {
 public:
  DirectIntegral(AtomicMeasure<double> measure, std::vector<FiberFrame<S>> fibers)
      : measure_(std::move(measure)), fibers_(std::move(fibers)) {
    if (measure_.size() != fibers_.size()) {
      throw ValidationError("direct integral needs one fiber per atom");
    }
    n_ = fibers_.empty() ? 0 : fibers_.front().size();
    for (std::size_t a = 0; a < fibers_.size(); ++a) {
      if (fibers_[a].rank < 1) throw ValidationError("direct integral fiber has rank zero");
      if (fibers_[a].lambda != measure_[a].lambda) {
        throw ValidationError("fiber and atom positions disagree");
      }
      if (fibers_[a].size() != n_) throw DimensionError("fibers disagree on N");
    }
  }

  static DirectIntegral build(const SpectralModel<S>& m) {
    return DirectIntegral(m.measure.mu, build_fibers(gram_field(m), m.tolerances.psd));
  }

  const AtomicMeasure<double>& measure() const { return measure_; }
  const std::vector<FiberFrame<S>>& fibers() const { return fibers_; }
  std::size_t atom_count() const { return fibers_.size(); }
  Index dimension() const { return n_; }
  double lambda(std::size_t a) const { return measure_[a].lambda; }
  double mass(std::size_t a) const { return measure_[a].mass; }

  Section<S> zero_section() const {
    Section<S> x;
    x.values.reserve(fibers_.size());
    for (const auto& f : fibers_) x.values.push_back(Vector<S>::Zero(f.rank));
    return x;
  }

  void check(const Section<S>& x) const {
    if (x.values.size() != fibers_.size()) {
      throw MeasureMismatch("section is defined over a different measure");
    }
    for (std::size_t a = 0; a < fibers_.size(); ++a) {
      if (x.values[a].size() != fibers_[a].rank) {
        throw MeasureMismatch("section value does not match fiber rank");
      }
    }
  }

 private:
  AtomicMeasure<double> measure_;
  std::vector<FiberFrame<S>> fibers_;
  Index n_ = 0;
};

/// U(x)(lambda) = sum_j x_j V_j(lambda).
template <FieldScalar S>
Section<S> apply_U(const DirectIntegral<S>& di, const Vector<S>& x) {
  if (x.size() != di.dimension()) throw DimensionError("apply_U: dimension mismatch");
  Section<S> out;
  out.values.reserve(di.atom_count());
  for (const auto& f : di.fibers()) out.values.push_back(f.coefficients * x);
  return out;
}

/// sum_lambda <X(lambda), Y(lambda)> mu(lambda).
template <FieldScalar S>
S inner_product_mu(const DirectIntegral<S>& di, const Section<S>& x, const Section<S>& y) {
  di.check(x);
  di.check(y);
  S sum = S(0.0);
  for (std::size_t a = 0; a < di.atom_count(); ++a) {
    sum += inner<S>(x.values[a], y.values[a]) * di.mass(a);
  }
  return sum;
}

template <FieldScalar S>
double norm_mu(const DirectIntegral<S>& di, const Section<S>& x) {
  return std::sqrt(std::max(0.0, real_part(inner_product_mu(di, x, x))));
}

/// (T_f X)(lambda) = f(lambda) X(lambda).
template <FieldScalar S, class F>
Section<S> multiply(const DirectIntegral<S>& di, F&& f, const Section<S>& x) {
  di.check(x);
  Section<S> out = x;
  for (std::size_t a = 0; a < di.atom_count(); ++a) out.values[a] *= S(f(di.lambda(a)));
  return out;
}

/// T = T_id.
template <FieldScalar S>
Section<S> multiply_identity(const DirectIntegral<S>& di, const Section<S>& x) {
  return multiply(di, [](double t) { return t; }, x);
}

/// || U(A~ x) - T U(x) ||_mu.
template <FieldScalar S>
double intertwining_residual(const DirectIntegral<S>& di, const SpectralModel<S>& m,
                             const Vector<S>& x) {
  const Section<S> lhs = apply_U(di, Vector<S>(m.sampling.matrix() * x));
  const Section<S> rhs = multiply_identity(di, apply_U(di, x));
  return norm_mu(di, lhs - rhs);
}

inline constexpr double kMaxRangeCondition = 1e12;

/// Orthogonal projection onto span{U(e_1), ..., U(e_m)} via the normal
/// equations on their Gram matrix.
template <FieldScalar S>
Section<S> project_onto_range(const DirectIntegral<S>& di, Index m, const Section<S>& x) {
  di.check(x);
  if (m < 1 || m > di.dimension()) {
    throw DimensionError("project_onto_range: frame size must lie in [1, N]");
  }
  // U(e_j)(lambda) is column j of the fiber coefficients.
  Matrix<S> gram = Matrix<S>::Zero(m, m);  // gram(i, j) = <U e_j, U e_i>
  Vector<S> rhs = Vector<S>::Zero(m);      // rhs(i) = <X, U e_i>
  for (std::size_t a = 0; a < di.atom_count(); ++a) {
    const auto cols = di.fibers()[a].coefficients.leftCols(m);
    gram += di.mass(a) * (cols.adjoint() * cols);
    rhs += di.mass(a) * (cols.adjoint() * x.values[a]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(m - 1);
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (cond > kMaxRangeCondition) {
    throw ConditionError("project_onto_range: Gram matrix is ill-conditioned (condition " +
                             std::to_string(cond) + ")",
                         cond);
  }
  const Vector<S> c = gram.ldlt().solve(rhs);
  Section<S> out;
  out.values.reserve(di.atom_count());
  for (const auto& f : di.fibers()) out.values.push_back(f.coefficients.leftCols(m) * c);
  return out;
}

}  // namespace specint
