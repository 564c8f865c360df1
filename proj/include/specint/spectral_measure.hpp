#pragma once

// Finitely supported measures on the real line: the induced spectral
// probability measure, the signed measures nu^{x,y}, their Radon-Nikodym
// Gram matrices against mu, and the inequality/convergence diagnostics.

#include <specint/sampling.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

namespace specint {

enum class MeasureKind { probability, signed_measure };

template <class T>
struct Atom {
  double lambda = 0.0;
  T mass{};
};

/// Sorted, duplicate-free list of atoms. Probability measures carry strictly
/// positive real masses of total at most one.
template <class T>
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  AtomicMeasure(std::vector<Atom<T>> atoms, MeasureKind kind)
      : atoms_(std::move(atoms)), kind_(kind) {
    for (std::size_t i = 1; i < atoms_.size(); ++i) {
      if (!(atoms_[i].lambda > atoms_[i - 1].lambda)) {
        throw ValidationError("atoms must be strictly increasing in lambda");
      }
    }
    if (kind_ == MeasureKind::probability) {
      if constexpr (!std::is_same_v<T, double>) {
        throw KindError("probability measures need real masses");
      } else {
        double total = 0.0;
        for (const auto& a : atoms_) {
          if (!(a.mass > 0.0)) throw ValidationError("probability atoms must have positive mass");
          total += a.mass;
        }
        if (total > 1.0 + 1e-12) throw ValidationError("probability measure has mass above one");
      }
    }
  }

  const std::vector<Atom<T>>& atoms() const { return atoms_; }
  MeasureKind kind() const { return kind_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom<T>& operator[](std::size_t i) const { return atoms_[i]; }

  T total() const {
    T sum{};
    for (const auto& a : atoms_) sum += a.mass;
    return sum;
  }

  /// Sum of masses of atoms with lambda <= t.
  T cdf(double t) const {
    T sum{};
    for (const auto& a : atoms_) {
      if (a.lambda > t) break;
      sum += a.mass;
    }
    return sum;
  }

  /// Sum of masses of atoms with lambda < t.
  T cdf_left(double t) const {
    T sum{};
    for (const auto& a : atoms_) {
      if (a.lambda >= t) break;
      sum += a.mass;
    }
    return sum;
  }

 private:
  std::vector<Atom<T>> atoms_;
  MeasureKind kind_ = MeasureKind::signed_measure;
};

/// mu~ restricted to its retained atoms, with the bookkeeping needed to map
/// atoms back to eigen-clusters.
struct SpectralMeasure {
  AtomicMeasure<double> mu;
  std::vector<std::size_t> cluster;  // cluster index of each retained atom
  double dropped_mass = 0.0;
  std::size_t dropped_atoms = 0;
  double tol_atom = 1e-14;
};

/// mu~(lambda) = sum_j c_j ||P_lambda e_j||^2; atoms at or below tol_atom
/// are dropped and their mass reported, never renormalised.
template <FieldScalar S>
SpectralMeasure spectral_probability_measure(const QuasiSampling<S>& s,
                                             const EigenDecomposition<S>& d,
                                             double tol_atom = 1e-14) {
  if (d.dimension() != s.dimension()) {
    throw DimensionError("decomposition does not belong to this quasi-sampling");
  }
  const auto& c = s.weights();
  SpectralMeasure out;
  out.tol_atom = tol_atom;
  std::vector<Atom<double>> atoms;
  for (std::size_t k = 0; k < d.clusters.size(); ++k) {
    const auto& basis = d.clusters[k].basis;
    // ||P e_j||^2 is the squared norm of row j of the orthonormal basis.
    double mass = 0.0;
    for (Index j = 0; j < basis.rows(); ++j) mass += c[j] * basis.row(j).squaredNorm();
    if (mass <= tol_atom) {
      out.dropped_mass += mass;
      ++out.dropped_atoms;
      continue;
    }
    atoms.push_back({d.clusters[k].lambda, mass});
    out.cluster.push_back(k);
  }
  out.mu = AtomicMeasure<double>(std::move(atoms), MeasureKind::probability);
  return out;
}

struct ModelTolerances {
  std::optional<double> cluster;
  double atom = 1e-14;
  double psd = 1e-10;
};

/// Quasi-sampling, its eigendecomposition and its spectral measure.
template <FieldScalar S>
struct SpectralModel {
  QuasiSampling<S> sampling;
  EigenDecomposition<S> eigen;
  SpectralMeasure measure;
  ModelTolerances tolerances;

  Index dimension() const { return sampling.dimension(); }
  std::size_t atom_count() const { return measure.mu.size(); }
  const Cluster<S>& atom_cluster(std::size_t atom) const {
    return eigen.clusters[measure.cluster[atom]];
  }
  double matrix_max() const { return max_abs(sampling.matrix()); }

  /// Projection onto the retained spectral subspace (the span of the
  /// eigenspaces of the retained atoms).
  Matrix<S> retained_projector() const {
    Matrix<S> p = Matrix<S>::Zero(dimension(), dimension());
    for (std::size_t a = 0; a < atom_count(); ++a) p += atom_cluster(a).projector();
    return p;
  }

  Vector<S> project_retained(const Vector<S>& x) const {
    if (measure.dropped_atoms == 0) return x;
    Vector<S> out = Vector<S>::Zero(x.size());
    for (std::size_t a = 0; a < atom_count(); ++a) out += atom_cluster(a).project(x);
    return out;
  }
};

template <FieldScalar S>
SpectralModel<S> build_spectral_model(QuasiSampling<S> s, const ModelTolerances& tol = {}) {
  auto d = eigendecompose(s, tol.cluster);
  auto mu = spectral_probability_measure(s, d, tol.atom);
  return SpectralModel<S>{std::move(s), std::move(d), std::move(mu), tol};
}

namespace detail {

template <FieldScalar S>
void check_dimension(const SpectralModel<S>& m, const Vector<S>& x, const char* what) {
  if (x.size() != m.dimension()) {
    throw DimensionError(std::string(what) + ": vector has dimension " + std::to_string(x.size()) +
                         ", expected " + std::to_string(m.dimension()));
  }
}

/// <P_lambda x, P_lambda y> for every retained atom.
template <FieldScalar S>
std::vector<S> atom_inner_products(const SpectralModel<S>& m, const Vector<S>& x,
                                   const Vector<S>& y) {
  std::vector<S> out(m.atom_count());
  for (std::size_t a = 0; a < m.atom_count(); ++a) {
    const auto& basis = m.atom_cluster(a).basis;
    const Vector<S> px = basis.adjoint() * x;
    const Vector<S> py = basis.adjoint() * y;
    out[a] = inner<S>(px, py);
  }
  return out;
}

}  // namespace detail

/// nu^{x,y}({lambda}) = <P_lambda x, P_lambda y> over the retained atoms.
template <FieldScalar S>
AtomicMeasure<S> nu_measure(const SpectralModel<S>& m, const Vector<S>& x, const Vector<S>& y) {
  detail::check_dimension(m, x, "nu_measure");
  detail::check_dimension(m, y, "nu_measure");
  const auto masses = detail::atom_inner_products(m, x, y);
  std::vector<Atom<S>> atoms(masses.size());
  for (std::size_t a = 0; a < masses.size(); ++a) atoms[a] = {m.measure.mu[a].lambda, masses[a]};
  return AtomicMeasure<S>(std::move(atoms), MeasureKind::signed_measure);
}

/// Radon-Nikodym densities U_{j,l}(lambda) = <P e_j, P e_l> / mu~(lambda),
/// produced per atom on demand.
template <FieldScalar S>
class GramField {
 public:
  explicit GramField(const SpectralModel<S>& m) : n_(m.dimension()) {
    for (std::size_t a = 0; a < m.atom_count(); ++a) {
      const double mass = m.measure.mu[a].mass;
      if (mass <= m.measure.tol_atom) {
        throw ValidationError("gram_field: atom at " + std::to_string(m.measure.mu[a].lambda) +
                              " has mass below tol_atom");
      }
      lambdas_.push_back(m.measure.mu[a].lambda);
      masses_.push_back(mass);
      bases_.push_back(m.atom_cluster(a).basis);
    }
  }

  std::size_t size() const { return lambdas_.size(); }
  Index dimension() const { return n_; }
  double lambda(std::size_t a) const { return lambdas_[a]; }
  double mass(std::size_t a) const { return masses_[a]; }
  Index multiplicity(std::size_t a) const { return bases_[a].cols(); }

  /// U(lambda_a). Since <P e_j, P e_l> = P_{l j}, U = P^T / mu.
  Matrix<S> matrix(std::size_t a) const {
    const Matrix<S>& q = bases_[a];
    return (q * q.adjoint()).transpose() / masses_[a];
  }

 private:
  Index n_;
  std::vector<double> lambdas_;
  std::vector<double> masses_;
  std::vector<Matrix<S>> bases_;
};

template <FieldScalar S>
GramField<S> gram_field(const SpectralModel<S>& m) {
  return GramField<S>(m);
}

/// sum over atoms of lambda^k * mass.
template <class T>
T moment(const AtomicMeasure<T>& m, int k) {
  if (k < 0) throw ValidationError("moment order must be nonnegative");
  T sum{};
  for (const auto& a : m.atoms()) sum += std::pow(a.lambda, k) * a.mass;
  return sum;
}

struct InequalityPair {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const { return rhs - lhs; }
};

/// actual = mu~(|lambda| > n); bound = n^-2 sum_j c_j ||A~ e_j||^2.
template <FieldScalar S>
InequalityPair tail_mass_check(const SpectralModel<S>& m, double n) {
  if (!(n > 0.0)) throw ValidationError("tail_mass_check: n must be positive");
  InequalityPair out;
  for (const auto& a : m.measure.mu.atoms()) {
    if (std::abs(a.lambda) > n) out.lhs += a.mass;
  }
  const auto& c = m.sampling.weights();
  double sum = 0.0;
  for (Index j = 0; j < m.dimension(); ++j) sum += c[j] * m.sampling.matrix().col(j).squaredNorm();
  out.rhs = sum / (n * n);
  return out;
}

/// lhs = sum_lambda |<P x, P y>|, rhs = ||x|| ||y||.
template <FieldScalar S>
InequalityPair cauchy_schwarz_check(const SpectralModel<S>& m, const Vector<S>& x,
                                    const Vector<S>& y) {
  detail::check_dimension(m, x, "cauchy_schwarz_check");
  detail::check_dimension(m, y, "cauchy_schwarz_check");
  InequalityPair out;
  for (const S& v : detail::atom_inner_products(m, x, y)) out.lhs += std::abs(v);
  out.rhs = x.norm() * y.norm();
  return out;
}

/// lhs = sum_lambda |<P x1, P y1> - <P x2, P y2>|,
/// rhs = ||x1|| ||y1 - y2|| + ||x1 - x2|| ||y2||.
template <FieldScalar S>
InequalityPair perturbation_bound(const SpectralModel<S>& m, const Vector<S>& x1,
                                  const Vector<S>& x2, const Vector<S>& y1, const Vector<S>& y2) {
  for (const auto* v : {&x1, &x2, &y1, &y2}) detail::check_dimension(m, *v, "perturbation_bound");
  const auto first = detail::atom_inner_products(m, x1, y1);
  const auto second = detail::atom_inner_products(m, x2, y2);
  InequalityPair out;
  for (std::size_t a = 0; a < first.size(); ++a) out.lhs += std::abs(first[a] - second[a]);
  out.rhs = x1.norm() * (y1 - y2).norm() + (x1 - x2).norm() * y2.norm();
  return out;
}

/// For each budget delta, the largest sum_{lambda in E} |<P x, P y>| over
/// atom sets E with mu~(E) <= delta, found greedily by decreasing density
/// |<P x, P y>| / mu~(lambda) (ties by ascending lambda). The greedy fill
/// stops at the first atom that does not fit.
template <FieldScalar S>
std::vector<double> s_integrability_profile(const SpectralModel<S>& m, const Vector<S>& x,
                                            const Vector<S>& y, std::span<const double> deltas) {
  const auto values = detail::atom_inner_products(m, x, y);
  const auto& atoms = m.measure.mu.atoms();
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = std::abs(values[a]) / atoms[a].mass;
    const double db = std::abs(values[b]) / atoms[b].mass;
    if (da != db) return da > db;
    return atoms[a].lambda < atoms[b].lambda;
  });
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double delta : deltas) {
    if (!(delta >= 0.0)) throw ValidationError("s_integrability_profile: deltas must be >= 0");
    double used = 0.0;
    double value = 0.0;
    for (std::size_t idx : order) {
      if (used + atoms[idx].mass > delta + 1e-12) break;
      used += atoms[idx].mass;
      value += std::abs(values[idx]);
    }
    out.push_back(value);
  }
  return out;
}

/// max over 0 <= k <= k_max of
///   |moment(nu^{x,x}, k) - <A~^k P x, P x>| / ((1 + max|A~|)^k ||x||^2),
/// with P the projection onto the retained spectral subspace.
template <FieldScalar S>
double moment_defect(const SpectralModel<S>& m, const Vector<S>& x, int k_max) {
  detail::check_dimension(m, x, "moment_defect");
  const double norm2 = x.squaredNorm();
  if (norm2 == 0.0) return 0.0;
  const auto nu = nu_measure(m, x, x);
  const Vector<S> px = m.project_retained(x);
  const double scale = 1.0 + m.matrix_max();
  Vector<S> ak = px;
  double worst = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) ak = m.sampling.matrix() * ak;
    const S exact = inner<S>(ak, px);
    worst = std::max(worst, std::abs(moment(nu, k) - exact) / (std::pow(scale, k) * norm2));
  }
  return worst;
}

/// Converts nu^{x,x} (nonnegative real masses) into a probability measure
/// normalised to total one; zero atoms are omitted.
template <FieldScalar S>
AtomicMeasure<double> to_probability(const AtomicMeasure<S>& nu) {
  double total = 0.0;
  for (const auto& a : nu.atoms()) {
    const double re = real_part(a.mass);
    const double scale = std::max(1.0, std::abs(a.mass));
    if (std::abs(imag_part(a.mass)) > 1e-12 * scale || re < -1e-12 * scale) {
      throw KindError("measure has non-positive or complex masses");
    }
    total += std::max(0.0, re);
  }
  if (!(total > 0.0)) throw KindError("measure has zero total mass");
  std::vector<Atom<double>> atoms;
  for (const auto& a : nu.atoms()) {
    const double re = real_part(a.mass);
    if (re > 0.0) atoms.push_back({a.lambda, re / total});
  }
  return AtomicMeasure<double>(std::move(atoms), MeasureKind::probability);
}

/// sup |F1 - F2| evaluated at every atom position and its left limit.
inline double kolmogorov_distance(const AtomicMeasure<double>& m1, const AtomicMeasure<double>& m2) {
  if (m1.kind() != MeasureKind::probability || m2.kind() != MeasureKind::probability) {
    throw KindError("kolmogorov_distance needs probability measures");
  }
  std::vector<double> grid;
  for (const auto& a : m1.atoms()) grid.push_back(a.lambda);
  for (const auto& a : m2.atoms()) grid.push_back(a.lambda);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Merge-walk both CDFs so the cost is linear after sorting.
  double f1 = 0.0;
  double f2 = 0.0;
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  double sup = 0.0;
  for (double t : grid) {
    sup = std::max(sup, std::abs(f1 - f2));  // left limit at t
    while (i1 < m1.size() && m1[i1].lambda <= t) f1 += m1[i1++].mass;
    while (i2 < m2.size() && m2[i2].lambda <= t) f2 += m2[i2++].mass;
    sup = std::max(sup, std::abs(f1 - f2));
  }
  return sup;
}

/// sup |F - G| against a continuous reference CDF G.
inline double kolmogorov_distance(const AtomicMeasure<double>& m,
                                  const std::function<double(double)>& reference_cdf) {
  if (m.kind() != MeasureKind::probability) {
    throw KindError("kolmogorov_distance needs a probability measure");
  }
  double f = 0.0;
  double sup = 0.0;
  for (const auto& a : m.atoms()) {
    const double g = reference_cdf(a.lambda);
    sup = std::max(sup, std::abs(f - g));
    f += a.mass;
    sup = std::max(sup, std::abs(f - g));
  }
  return sup;
}

/// CDF of the semicircle law with density sqrt(4 - t^2) / (2 pi) on [-2, 2].
inline double semicircle_cdf(double t) {
  if (t <= -2.0) return 0.0;
  if (t >= 2.0) return 1.0;
  return 0.5 + t * std::sqrt(4.0 - t * t) / (4.0 * std::numbers::pi) +
         std::asin(t / 2.0) / std::numbers::pi;
}

/// Groups atoms into bins [k w, (k+1) w) represented by their midpoints.
template <class T>
AtomicMeasure<T> bin_pushforward(const AtomicMeasure<T>& m, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin_pushforward: bin width must be positive");
  std::map<long long, T> bins;
  for (const auto& a : m.atoms()) {
    const auto k = static_cast<long long>(std::floor(a.lambda / bin_width));
    bins[k] += a.mass;
  }
  std::vector<Atom<T>> atoms;
  atoms.reserve(bins.size());
  for (const auto& [k, mass] : bins) {
    atoms.push_back({(static_cast<double>(k) + 0.5) * bin_width, mass});
  }
  return AtomicMeasure<T>(std::move(atoms), m.kind());
}

}  // namespace specint
