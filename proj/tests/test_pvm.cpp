#include <specint/pvm.hpp>

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace specint;
using Catch::Approx;

namespace {

SpectralModel<double> diag_model() {
  Matrix<double> a = Matrix<double>::Zero(3, 3);
  a.diagonal() << 1, 2, 3;
  return build_spectral_model(QuasiSampling<double>(a, scale_weights(3)));
}

SpectralModel<double> swap_model() {
  Matrix<double> a(2, 2);
  a << 0, 1, 1, 0;
  return build_spectral_model(QuasiSampling<double>(a, scale_weights(2)));
}

SpectralModel<double> registry_model(const std::string& name, Index n) {
  return build_spectral_model(QuasiSampling<double>::from_spec(make_registry_operator<double>(name), n));
}

bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) {
      UNSCOPED_INFO(c.name << " value " << c.value << " bound " << c.bound);
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("Borel sets normalise their pieces", "[pvm][borel]") {
  const BorelSet s{Interval::closed(2, 3), Interval::closed(0, 1), Interval::open(1, 1.5)};
  REQUIRE(s.intervals().size() == 2);
  CHECK(s.intervals()[0].lo == 0.0);
  CHECK(s.intervals()[0].hi == 1.5);
  CHECK_FALSE(s.intervals()[0].hi_closed);
  CHECK(s.contains(1.0));
  CHECK_FALSE(s.contains(1.5));
  CHECK(s.contains(2.0));

  const BorelSet a{Interval::closed(0, 1.5)};
  const BorelSet b{Interval::open_closed(1.5, 4)};
  CHECK(a.disjoint(b));
  CHECK(a.intersect(b).is_empty());
  CHECK(a.unite(b).intervals().size() == 1);
  const BorelSet c{Interval::closed(1.5, 4)};
  CHECK_FALSE(a.disjoint(c));
  CHECK(a.intersect(c).contains(1.5));
  CHECK(BorelSet{Interval::open(1, 1)}.is_empty());
  CHECK(BorelSet::real_line().contains(-1e300));
}

TEST_CASE("spectral projection examples", "[pvm][spectral_projection]") {
  const auto m = diag_model();
  const auto whole = spectral_projection(m, BorelSet{Interval::closed(0.5, 3.5)});
  CHECK(max_abs(Matrix<double>(whole.matrix - Matrix<double>::Identity(3, 3))) <= 1e-15);
  CHECK(max_abs(spectral_projection(m, BorelSet()).matrix) == 0.0);
  const auto p1 = spectral_projection(m, BorelSet{Interval::closed(0.5, 1.5)});
  Matrix<double> expected = Matrix<double>::Zero(3, 3);
  expected(0, 0) = 1.0;
  CHECK(max_abs(Matrix<double>(p1.matrix - expected)) <= 1e-15);

  // Endpoint flags decide membership of atoms on the boundary.
  CHECK(max_abs(spectral_projection(m, BorelSet{Interval::open(1, 3)}).matrix) == Approx(1.0));
  CHECK(spectral_projection(m, BorelSet{Interval::open(1, 3)}).matrix(1, 1) == Approx(1.0));
  CHECK(spectral_projection(m, BorelSet{Interval::open(1, 3)}).matrix(0, 0) == Approx(0.0).margin(1e-15));
  CHECK(spectral_projection(m, BorelSet{Interval::closed(1, 3)}).matrix.trace() == Approx(3.0));
}

TEST_CASE("PVM axioms on diag(1,2,3) with a shared endpoint", "[pvm][axioms]") {
  const auto m = diag_model();
  const std::vector<BorelSet> sets{BorelSet{Interval::closed(0, 1.5)}, BorelSet{Interval::open_closed(1.5, 4)}};
  CHECK(all_pass(pvm_axiom_report(m, sets)));
  const Matrix<double> sum = spectral_projection(m, sets[0]).matrix + spectral_projection(m, sets[1]).matrix;
  CHECK(max_abs(Matrix<double>(sum - Matrix<double>::Identity(3, 3))) <= 1e-15);
}

TEST_CASE("PVM axioms for random intervals on free Jacobi", "[pvm][axioms][property]") {
  const auto m = registry_model("free_jacobi", 32);
  SplitMix64 rng(61);
  std::vector<BorelSet> sets;
  for (int i = 0; i < 20; ++i) {
    double a = 2.5 * rng.symmetric();
    double b = 2.5 * rng.symmetric();
    if (a > b) std::swap(a, b);
    sets.push_back(i % 2 == 0 ? BorelSet{Interval::closed(a, b)} : BorelSet{Interval::open(a, b)});
  }
  sets.push_back(BorelSet::real_line());
  CHECK(all_pass(pvm_axiom_report(m, sets)));

  // <P(B) x, y> = nu^{x,y}(B) against a direct eigenprojection sum.
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_unit_vector<double>(rng, 32);
    const auto y = random_unit_vector<double>(rng, 32);
    for (const auto& b : sets) {
      const auto p = spectral_projection(m, b);
      Vector<double> direct = Vector<double>::Zero(32);
      double nu_b = 0.0;
      for (std::size_t k = 0; k < m.eigen.clusters.size(); ++k) {
        const auto& c = m.eigen.clusters[k];
        if (!b.contains(c.lambda)) continue;
        const Vector<double> px = c.basis * (c.basis.transpose() * x);
        direct += px;
        nu_b += px.dot(c.basis * (c.basis.transpose() * y));
      }
      CHECK((p.matrix * x - direct).norm() <= 1e-12);
      CHECK(std::abs(y.dot(p.matrix * x) - nu_b) <= 1e-10);
      CHECK(std::abs(y.dot(p.matrix * x)) <= x.norm() * y.norm() + 1e-12);
      CHECK(min_hermitian_eigenvalue<double>(p.matrix) >= -1e-10);
    }
  }
}

TEST_CASE("functional calculus examples", "[pvm][functional_calculus]") {
  const auto m = diag_model();
  CHECK(max_abs(Matrix<double>(functional_calculus(m, Polynomial::constant(1.0)) -
                               Matrix<double>::Identity(3, 3))) <= 1e-15);
  CHECK(max_abs(Matrix<double>(functional_calculus(m, Polynomial::identity()) - m.sampling.matrix())) <= 1e-15);

  const auto j = registry_model("free_jacobi", 16);
  const auto jac = oracle::jacobi(16, 0.0, 1.0);
  const auto sq = oracle::multiply(jac, jac);
  const auto fc = functional_calculus(j, Polynomial::monomial(2));
  double worst = 0.0;
  for (Index r = 0; r < 16; ++r) {
    for (Index c = 0; c < 16; ++c) worst = std::max(worst, std::abs(fc(r, c) - sq[r][c]));
  }
  CHECK(worst <= 1e-9);

  // Piecewise: |t| as two linear pieces.
  const PiecewisePolynomial abs_t({0.0}, {Polynomial({0.0, -1.0}), Polynomial::identity()});
  const auto s = swap_model();
  CHECK(max_abs(Matrix<double>(functional_calculus(s, abs_t) - Matrix<double>::Identity(2, 2))) <= 1e-14);
  CHECK_THROWS_AS(PiecewisePolynomial({1.0, 0.0}, {Polynomial(), Polynomial(), Polynomial()}), ValidationError);
  CHECK_THROWS_AS(PiecewisePolynomial({0.0}, {Polynomial()}), ValidationError);
}

TEST_CASE("functional calculus is multiplicative", "[pvm][functional_calculus][property]") {
  SplitMix64 rng(71);
  for (const auto& e : builtin_registry()) {
    const auto m = registry_model(e.name, 24);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> a(5);
      std::vector<double> b(5);
      for (auto& v : a) v = rng.symmetric();
      for (auto& v : b) v = rng.symmetric();
      const Polynomial phi(a);
      const Polynomial psi(b);
      const Matrix<double> joint = functional_calculus(m, phi * psi);
      const Matrix<double> prod = functional_calculus(m, phi) * functional_calculus(m, psi);
      CHECK(max_abs(Matrix<double>(prod - joint)) <= 1e-9 * std::max(1.0, max_abs(joint)));
    }
    const PiecewisePolynomial step({0.5}, {Polynomial::constant(0.0), Polynomial::constant(1.0)});
    const PiecewisePolynomial ramp({-1.0, 1.0}, {Polynomial(), Polynomial::identity(), Polynomial::constant(2.0)});
    const Matrix<double> joint = functional_calculus(m, step * ramp);
    const Matrix<double> prod = functional_calculus(m, step) * functional_calculus(m, ramp);
    CHECK(max_abs(Matrix<double>(prod - joint)) <= 1e-9 * std::max(1.0, max_abs(joint)));
  }
}

TEST_CASE("reconstruction residual", "[pvm][reconstruction]") {
  CHECK(reconstruction_residual(diag_model()) <= 1e-12);
  CHECK(reconstruction_residual(swap_model()) <= 1e-12);
  for (const auto& e : builtin_registry()) {
    for (Index n : {16, 64, 128}) {
      const auto m = registry_model(e.name, n);
      CHECK(reconstruction_residual(m) <= 1e-9 * (1.0 + m.matrix_max()));
    }
  }
}

TEST_CASE("moment identity examples", "[pvm][moment_identity]") {
  const auto j = registry_model("free_jacobi", 20);
  const auto pairs = moment_identity_check(j, basis_vector<double>(20, 0));
  CHECK(pairs[0].lhs == Approx(0.0).margin(1e-12));
  CHECK(pairs[0].rhs == 0.0);
  CHECK(pairs[1].lhs == Approx(1.0).epsilon(1e-12));
  CHECK(pairs[1].rhs == 1.0);

  const auto& c = j.eigen.clusters[3];
  const Vector<double> v = c.basis.col(0);
  const auto ev = moment_identity_check(j, v);
  CHECK(ev[0].lhs == Approx(c.lambda).margin(1e-12));
  CHECK(ev[0].rhs == Approx(c.lambda).margin(1e-12));
  CHECK(ev[1].lhs == Approx(c.lambda * c.lambda).margin(1e-12));
  CHECK(ev[1].rhs == Approx(c.lambda * c.lambda).margin(1e-12));

  SplitMix64 rng(5);
  const auto d = diag_model();
  const auto x = random_unit_vector<double>(rng, 3);
  // Direct summation on the diagonal: sum_k k x_k^2 and sum_k k^2 x_k^2.
  double first = 0.0;
  double second = 0.0;
  for (Index k = 0; k < 3; ++k) {
    first += (k + 1.0) * x(k) * x(k);
    second += (k + 1.0) * (k + 1.0) * x(k) * x(k);
  }
  const auto dp = moment_identity_check(d, x);
  CHECK(dp[0].lhs == Approx(first).margin(1e-10));
  CHECK(dp[0].rhs == Approx(first).margin(1e-10));
  CHECK(dp[1].lhs == Approx(second).margin(1e-10));
  CHECK(dp[1].rhs == Approx(second).margin(1e-10));
}

TEST_CASE("PVM on the retained subspace when atoms are dropped", "[pvm][dropped]") {
  const auto m = registry_model("harmonic_oscillator", 64);
  REQUIRE(m.measure.dropped_atoms > 0);
  const auto whole = spectral_projection(m, BorelSet::real_line()).matrix;
  CHECK(max_abs(Matrix<double>(whole - m.retained_projector())) <= 1e-12);
  CHECK(reconstruction_residual(m) <= 1e-9 * (1.0 + m.matrix_max()));
  const auto x = m.project_retained(basis_vector<double>(64, 0));
  const auto pairs = moment_identity_check(m, x);
  for (const auto& p : pairs) CHECK(std::abs(p.lhs - p.rhs) <= 1e-9 * std::pow(1.0 + m.matrix_max(), p.order));
}
