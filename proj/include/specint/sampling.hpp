#pragma once

// The quasi-sampling container (truncated operator + scale weights) and its
// clustered eigendecomposition into eigenspaces.

#include <specint/core.hpp>

#include <Eigen/Eigenvalues>

#include <optional>
#include <string>
#include <vector>

namespace specint {

template <FieldScalar S>
class QuasiSampling {
 public:
  QuasiSampling(Matrix<S> a_tilde, std::vector<double> weights, std::string name = "matrix")
      : matrix_(std::move(a_tilde)), weights_(std::move(weights)), name_(std::move(name)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw DimensionError("quasi-sampling matrix must be square");
    }
    if (matrix_.rows() < 1) throw DimensionError("quasi-sampling matrix is empty");
    validate_weights(weights_, matrix_.rows());
    const double asym = max_abs(matrix_ - matrix_.adjoint());
    if (asym > symmetry_tolerance(max_abs(matrix_))) {
      throw AsymmetryError("quasi-sampling matrix '" + name_ + "' is not Hermitian", asym);
    }
  }

  /// Truncates `spec` to N with the given weights (default: scale_weights(N)).
  static QuasiSampling from_spec(const OperatorSpec<S>& spec, Index n,
                                 std::optional<std::vector<double>> weights = std::nullopt) {
    auto t = truncate(spec, n);
    return QuasiSampling(std::move(t.matrix), weights ? std::move(*weights) : scale_weights(n),
                         spec.name);
  }

  Index dimension() const { return matrix_.rows(); }
  const Matrix<S>& matrix() const { return matrix_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::string& name() const { return name_; }
  static constexpr ScalarField field = field_of<S>();

 private:
  Matrix<S> matrix_;
  std::vector<double> weights_;
  std::string name_;
};

/// One eigenspace: representative eigenvalue (mean of its members) and an
/// orthonormal basis stored column-wise.
template <FieldScalar S>
struct Cluster {
  double lambda = 0.0;
  Index multiplicity = 0;
  Matrix<S> basis;  // N x multiplicity

  Matrix<S> projector() const { return basis * basis.adjoint(); }

  Vector<S> project(const Vector<S>& x) const { return basis * (basis.adjoint() * x); }
};

template <FieldScalar S>
struct EigenDecomposition {
  std::vector<Cluster<S>> clusters;
  Vector<double> eigenvalues;  // ascending
  double tol_cluster = 0.0;
  double tol_recon = 0.0;

  Index dimension() const { return eigenvalues.size(); }
};

inline double default_cluster_tolerance(double spread) { return std::max(1e-10, 1e-12 * spread); }

template <FieldScalar S>
double reconstruction_tolerance(const Matrix<S>& a) {
  return 1e-10 * (1.0 + max_abs(a) * static_cast<double>(a.rows()));
}

/// Full Hermitian eigendecomposition with eigenvalues grouped into clusters
/// of radius tol_cluster (measured from the smallest member).
template <FieldScalar S>
EigenDecomposition<S> eigendecompose(const QuasiSampling<S>& s,
                                     std::optional<double> tol_cluster = std::nullopt) {
  Eigen::SelfAdjointEigenSolver<Matrix<S>> solver(s.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("eigensolver did not converge for matrix '" + s.name() + "'");
  }
  EigenDecomposition<S> d;
  d.eigenvalues = solver.eigenvalues();
  const Matrix<S>& vectors = solver.eigenvectors();
  const Index n = d.eigenvalues.size();
  const double spread = d.eigenvalues(n - 1) - d.eigenvalues(0);
  d.tol_cluster = tol_cluster ? *tol_cluster : default_cluster_tolerance(spread);
  d.tol_recon = reconstruction_tolerance(s.matrix());

  Index start = 0;
  while (start < n) {
    Index stop = start + 1;
    while (stop < n && d.eigenvalues(stop) - d.eigenvalues(start) <= d.tol_cluster) ++stop;
    Cluster<S> c;
    c.multiplicity = stop - start;
    c.lambda = d.eigenvalues.segment(start, c.multiplicity).mean();
    c.basis = vectors.middleCols(start, c.multiplicity);
    d.clusters.push_back(std::move(c));
    start = stop;
  }
  return d;
}

/// P_lambda x for the cluster with index `cluster`.
template <FieldScalar S>
Vector<S> eigenprojection_apply(const EigenDecomposition<S>& d, std::size_t cluster,
                                const Vector<S>& x) {
  if (cluster >= d.clusters.size()) {
    throw ValidationError("unknown cluster id " + std::to_string(cluster));
  }
  if (x.size() != d.dimension()) throw DimensionError("eigenprojection_apply: dimension mismatch");
  return d.clusters[cluster].project(x);
}

/// max | A~ - sum_lambda lambda P_lambda |.
template <FieldScalar S>
double eigen_reconstruction_error(const QuasiSampling<S>& s, const EigenDecomposition<S>& d) {
  Matrix<S> sum = Matrix<S>::Zero(s.dimension(), s.dimension());
  for (const auto& c : d.clusters) sum += S(c.lambda) * c.projector();
  return max_abs(s.matrix() - sum);
}

/// || A~ x - A x || with x supported on the first m <= N directions: the
/// part of A x that leaks past the truncation, plus any in-block mismatch.
template <FieldScalar S>
double graph_residual(const OperatorSpec<S>& spec, const Vector<S>& x, Index n) {
  const Index m = x.size();
  if (m > n) throw DimensionError("graph_residual: x has more coefficients than N");
  const auto a_tilde = truncate(spec, n).matrix;
  Vector<S> padded = Vector<S>::Zero(n);
  padded.head(m) = x;

  const Index length = n + std::max<Index>(0, spec.halo(n));
  Vector<S> full = Vector<S>::Zero(length);
  for (Index j = 0; j < m; ++j) {
    if (x(j) != S(0.0)) full += x(j) * spec.column(j, length);
  }
  Vector<S> diff = -full;
  diff.head(n) += a_tilde * padded;
  return diff.norm();
}

}  // namespace specint
