#pragma once

// Projection-valued measure P(B) = sum_{lambda in B} P_lambda over the
// retained atoms, its axioms, and functional calculus for piecewise
// polynomials.

#include <specint/spectral_measure.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <limits>
#include <string>
#include <vector>

namespace specint {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  static Interval closed(double a, double b) { return {a, b, true, true}; }
  static Interval open(double a, double b) { return {a, b, false, false}; }
  static Interval closed_open(double a, double b) { return {a, b, true, false}; }
  static Interval open_closed(double a, double b) { return {a, b, false, true}; }

  bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }

  bool contains(double t) const {
    const bool above = lo_closed ? t >= lo : t > lo;
    const bool below = hi_closed ? t <= hi : t < hi;
    return above && below;
  }
};

/// Finite union of disjoint intervals, kept sorted; overlapping or touching
/// pieces are merged on construction.
class BorelSet {
 public:
  BorelSet() = default;
  explicit BorelSet(std::vector<Interval> pieces) {
    std::erase_if(pieces, [](const Interval& i) { return i.empty(); });
    std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) {
      if (a.lo != b.lo) return a.lo < b.lo;
      return a.lo_closed && !b.lo_closed;
    });
    for (const auto& piece : pieces) {
      if (!intervals_.empty() && joins(intervals_.back(), piece)) {
        auto& last = intervals_.back();
        if (piece.hi > last.hi) {
          last.hi = piece.hi;
          last.hi_closed = piece.hi_closed;
        } else if (piece.hi == last.hi) {
          last.hi_closed = last.hi_closed || piece.hi_closed;
        }
      } else {
        intervals_.push_back(piece);
      }
    }
  }
  BorelSet(std::initializer_list<Interval> pieces) : BorelSet(std::vector<Interval>(pieces)) {}

  static BorelSet real_line() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return BorelSet({Interval::open(-inf, inf)});
  }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool is_empty() const { return intervals_.empty(); }

  bool contains(double t) const {
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [t](const Interval& i) { return i.contains(t); });
  }

  BorelSet intersect(const BorelSet& other) const {
    std::vector<Interval> out;
    for (const auto& a : intervals_) {
      for (const auto& b : other.intervals_) {
        Interval c;
        if (a.lo > b.lo || (a.lo == b.lo && !a.lo_closed)) {
          c.lo = a.lo;
          c.lo_closed = a.lo_closed;
        } else {
          c.lo = b.lo;
          c.lo_closed = b.lo_closed;
        }
        if (a.hi < b.hi || (a.hi == b.hi && !a.hi_closed)) {
          c.hi = a.hi;
          c.hi_closed = a.hi_closed;
        } else {
          c.hi = b.hi;
          c.hi_closed = b.hi_closed;
        }
        if (!c.empty()) out.push_back(c);
      }
    }
    return BorelSet(std::move(out));
  }

  BorelSet unite(const BorelSet& other) const {
    std::vector<Interval> all = intervals_;
    all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
    return BorelSet(std::move(all));
  }

  bool disjoint(const BorelSet& other) const { return intersect(other).is_empty(); }

  std::string describe() const {
    if (intervals_.empty()) return "{}";
    std::string s;
    for (const auto& i : intervals_) {
      if (!s.empty()) s += " U ";
      s += (i.lo_closed ? "[" : "(") + std::to_string(i.lo) + "," + std::to_string(i.hi) +
           (i.hi_closed ? "]" : ")");
    }
    return s;
  }

 private:
  // Sorted a before b: do they overlap or touch with no gap point?
  static bool joins(const Interval& a, const Interval& b) {
    if (b.lo < a.hi) return true;
    if (b.lo == a.hi) return a.hi_closed || b.lo_closed;
    return false;
  }

  std::vector<Interval> intervals_;
};

/// sum_k coefficients[k] t^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {}

  static Polynomial constant(double v) { return Polynomial({v}); }
  static Polynomial identity() { return Polynomial({0.0, 1.0}); }
  static Polynomial monomial(int k) {
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c.back() = 1.0;
    return Polynomial(std::move(c));
  }

  const std::vector<double>& coefficients() const { return c_; }
  int degree() const { return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1; }

  double operator()(double t) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return Polynomial();
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(c));
  }

 private:
  std::vector<double> c_;
};

/// Piece i covers [breaks[i-1], breaks[i]) with breaks[-1] = -inf and
/// breaks[size] = +inf.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial(Polynomial p) : pieces_{std::move(p)} {}  // NOLINT: implicit by design
  PiecewisePolynomial(std::vector<double> breaks, std::vector<Polynomial> pieces)
      : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (pieces_.size() != breaks_.size() + 1) {
      throw ValidationError("piecewise polynomial needs one more piece than breakpoints");
    }
    if (!std::is_sorted(breaks_.begin(), breaks_.end()) ||
        std::adjacent_find(breaks_.begin(), breaks_.end()) != breaks_.end()) {
      throw ValidationError("piecewise polynomial breakpoints must be strictly increasing");
    }
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }

  std::size_t piece_index(double t) const {
    return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) -
                                    breaks_.begin());
  }

  double operator()(double t) const { return pieces_[piece_index(t)](t); }

  friend PiecewisePolynomial operator*(const PiecewisePolynomial& a,
                                       const PiecewisePolynomial& b) {
    std::vector<double> breaks = a.breaks_;
    breaks.insert(breaks.end(), b.breaks_.begin(), b.breaks_.end());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<Polynomial> pieces;
    pieces.reserve(breaks.size() + 1);
    // Pick a representative point strictly inside every merged piece.
    for (std::size_t i = 0; i <= breaks.size(); ++i) {
      double t = 0.0;
      if (breaks.empty()) {
        t = 0.0;
      } else if (i == 0) {
        t = breaks.front() - 1.0;
      } else if (i == breaks.size()) {
        t = breaks.back();
      } else {
        t = breaks[i - 1];
      }
      pieces.push_back(a.pieces_[a.piece_index(t)] * b.pieces_[b.piece_index(t)]);
    }
    return PiecewisePolynomial(std::move(breaks), std::move(pieces));
  }

 private:
  std::vector<double> breaks_;
  std::vector<Polynomial> pieces_;
};

template <FieldScalar S>
struct SpectralProjection {
  BorelSet set;
  Matrix<S> matrix;
};

/// P(B) = sum of the eigenprojections of the retained atoms inside B.
template <FieldScalar S>
SpectralProjection<S> spectral_projection(const SpectralModel<S>& m, const BorelSet& b) {
  const Index n = m.dimension();
  Index cols = 0;
  for (std::size_t a = 0; a < m.atom_count(); ++a) {
    if (b.contains(m.measure.mu[a].lambda)) cols += m.atom_cluster(a).multiplicity;
  }
  Matrix<S> q(n, cols);
  Index at = 0;
  for (std::size_t a = 0; a < m.atom_count(); ++a) {
    if (!b.contains(m.measure.mu[a].lambda)) continue;
    const auto& basis = m.atom_cluster(a).basis;
    q.middleCols(at, basis.cols()) = basis;
    at += basis.cols();
  }
  return SpectralProjection<S>{b, cols == 0 ? Matrix<S>(Matrix<S>::Zero(n, n))
                                            : Matrix<S>(q * q.adjoint())};
}

template <FieldScalar S>
double min_hermitian_eigenvalue(const Matrix<S>& h) {
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Idempotence, self-adjointness and nonnegativity per set; multiplicativity
/// for every pair; additivity for every disjoint pair.
template <FieldScalar S>
std::vector<Check> pvm_axiom_report(const SpectralModel<S>& m, const std::vector<BorelSet>& sets) {
  std::vector<SpectralProjection<S>> proj;
  proj.reserve(sets.size());
  for (const auto& b : sets) proj.push_back(spectral_projection(m, b));

  double idempotence = 0.0;
  double adjointness = 0.0;
  double negativity = 0.0;
  for (const auto& p : proj) {
    idempotence = std::max(idempotence, max_abs(p.matrix * p.matrix - p.matrix));
    adjointness = std::max(adjointness, max_abs(p.matrix - p.matrix.adjoint()));
    negativity = std::max(negativity, -min_hermitian_eigenvalue<S>(p.matrix));
  }
  double multiplicativity = 0.0;
  double additivity = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i; j < sets.size(); ++j) {
      const auto meet = spectral_projection(m, sets[i].intersect(sets[j]));
      multiplicativity =
          std::max(multiplicativity, max_abs(proj[i].matrix * proj[j].matrix - meet.matrix));
      if (i != j && sets[i].disjoint(sets[j])) {
        const auto join = spectral_projection(m, sets[i].unite(sets[j]));
        additivity =
            std::max(additivity, max_abs(proj[i].matrix + proj[j].matrix - join.matrix));
      }
    }
  }
  return {
      make_check("pvm_idempotence", idempotence, 1e-10),
      make_check("pvm_self_adjoint", adjointness, 1e-12),
      make_check("pvm_nonnegative", std::max(0.0, negativity), 1e-10),
      make_check("pvm_multiplicativity", multiplicativity, 1e-10),
      make_check("pvm_additivity", additivity, 1e-12),
  };
}

/// sum over retained atoms of f(lambda) P_lambda.
template <FieldScalar S, class F>
Matrix<S> function_of(const SpectralModel<S>& m, F&& f) {
  const Index n = m.dimension();
  Matrix<S> out = Matrix<S>::Zero(n, n);
  for (std::size_t a = 0; a < m.atom_count(); ++a) {
    const auto& basis = m.atom_cluster(a).basis;
    out += S(f(m.measure.mu[a].lambda)) * (basis * basis.adjoint());
  }
  return out;
}

template <FieldScalar S>
Matrix<S> functional_calculus(const SpectralModel<S>& m, const PiecewisePolynomial& phi) {
  return function_of(m, phi);
}

/// A~ compressed to the retained spectral subspace (A~ itself when no atom
/// was dropped).
template <FieldScalar S>
Matrix<S> retained_operator(const SpectralModel<S>& m) {
  if (m.measure.dropped_atoms == 0) return m.sampling.matrix();
  const Matrix<S> p = m.retained_projector();
  return p * m.sampling.matrix() * p;
}

/// max | A~ - integral id dP | over the retained subspace.
template <FieldScalar S>
double reconstruction_residual(const SpectralModel<S>& m) {
  return max_abs(retained_operator(m) - functional_calculus(m, Polynomial::identity()));
}

struct MomentPair {
  int order = 0;
  double lhs = 0.0;  // integral of t^order d nu^{x,x}
  double rhs = 0.0;  // <A~x, x> for order 1, ||A~x||^2 for order 2
};

template <FieldScalar S>
std::array<MomentPair, 2> moment_identity_check(const SpectralModel<S>& m, const Vector<S>& x) {
  const auto nu = nu_measure(m, x, x);
  const Vector<S> ax = m.sampling.matrix() * x;
  return {MomentPair{1, real_part(moment(nu, 1)), real_part(inner<S>(ax, x))},
          MomentPair{2, real_part(moment(nu, 2)), ax.squaredNorm()}};
}

}  // namespace specint
