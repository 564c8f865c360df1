#include <specint/direct_integral.hpp>
#include <specint/io.hpp>

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace specint;
using Catch::Approx;

namespace {

template <FieldScalar S = double>
struct Fixture {
  SpectralModel<S> model;
  DirectIntegral<S> di;

  explicit Fixture(SpectralModel<S> m) : model(std::move(m)), di(DirectIntegral<S>::build(model)) {}
};

Fixture<double> diag_fixture() {
  Matrix<double> a = Matrix<double>::Zero(3, 3);
  a.diagonal() << 1, 2, 3;
  return Fixture<double>(build_spectral_model(QuasiSampling<double>(a, scale_weights(3))));
}

Fixture<double> registry_fixture(const std::string& name, Index n) {
  return Fixture<double>(
      build_spectral_model(QuasiSampling<double>::from_spec(make_registry_operator<double>(name), n)));
}

}  // namespace

TEST_CASE("U(e_j) is the section of V_j", "[direct_integral][apply_U]") {
  auto fx = registry_fixture("free_jacobi", 6);
  for (Index j = 0; j < 6; ++j) {
    const auto x = apply_U(fx.di, basis_vector<double>(6, j));
    for (std::size_t a = 0; a < fx.di.atom_count(); ++a) {
      const auto& f = fx.di.fibers()[a];
      Vector<double> expanded = Vector<double>::Zero(6);
      for (Index k = 0; k < f.rank; ++k) expanded(f.pivots[k]) = x.values[a](k);
      CHECK((expanded - f.vector(j)).norm() == 0.0);
    }
  }
  CHECK_THROWS_AS(apply_U(fx.di, Vector<double>(Vector<double>::Zero(5))), DimensionError);
}

TEST_CASE("U(e_1) on diag(1,2,3)", "[direct_integral][apply_U]") {
  auto fx = diag_fixture();
  const auto x = apply_U(fx.di, basis_vector<double>(3, 0));
  CHECK(x.values[0](0) == Approx(std::sqrt(7.0 / 4.0)));
  CHECK(x.values[1].norm() == 0.0);
  CHECK(x.values[2].norm() == 0.0);
  CHECK(norm_mu(fx.di, x) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("U preserves inner products", "[direct_integral][isometry][property]") {
  SplitMix64 rng(51);
  for (const auto& e : builtin_registry()) {
    for (Index n : {8, 32}) {
      auto fx = registry_fixture(e.name, n);
      for (Index j = 0; j < n; ++j) {
        for (Index l = 0; l < n; ++l) {
          const double ip = inner_product_mu(fx.di, apply_U(fx.di, basis_vector<double>(n, j)),
                                             apply_U(fx.di, basis_vector<double>(n, l)));
          CHECK(std::abs(ip - (j == l ? 1.0 : 0.0)) <= 1e-10);
        }
      }
      for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_unit_vector<double>(rng, n);
        const auto y = random_unit_vector<double>(rng, n);
        const auto ux = apply_U(fx.di, x);
        const auto uy = apply_U(fx.di, y);
        CHECK(std::abs(norm_mu(fx.di, ux) - 1.0) <= 1e-9);
        CHECK(std::abs(inner_product_mu(fx.di, ux, uy) - x.dot(y)) <= 1e-9);
        // Radon-Nikodym identity per atom.
        const auto nu = nu_measure(fx.model, x, y);
        for (std::size_t a = 0; a < fx.di.atom_count(); ++a) {
          CHECK(std::abs(ux.values[a].dot(uy.values[a]) * fx.di.mass(a) - nu[a].mass) <= 1e-9);
        }
      }
    }
  }
  auto fx = diag_fixture();
  CHECK(inner_product_mu(fx.di, fx.di.zero_section(), apply_U(fx.di, basis_vector<double>(3, 1))) == 0.0);
}

TEST_CASE("complex sections preserve inner products", "[direct_integral][complex][property]") {
  Matrix<Complex> a(3, 3);
  a << Complex(1, 0), Complex(0, 1), Complex(0.5, 0), Complex(0, -1), Complex(2, 0), Complex(0, -0.5),
      Complex(0.5, 0), Complex(0, 0.5), Complex(3, 0);
  Fixture<Complex> fx(build_spectral_model(QuasiSampling<Complex>(a, scale_weights(3))));
  SplitMix64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_unit_vector<Complex>(rng, 3);
    const auto y = random_unit_vector<Complex>(rng, 3);
    const Complex got = inner_product_mu(fx.di, apply_U(fx.di, x), apply_U(fx.di, y));
    CHECK(std::abs(got - y.dot(x)) <= 1e-12);
    CHECK(intertwining_residual(fx.di, fx.model, x) <= 1e-12);
  }
}

TEST_CASE("multiplication operators", "[direct_integral][multiply]") {
  auto fx = diag_fixture();
  const auto x = apply_U(fx.di, Vector<double>(Vector<double>::Ones(3)));
  const auto same = multiply(fx.di, [](double) { return 1.0; }, x);
  for (std::size_t a = 0; a < 3; ++a) CHECK(same.values[a] == x.values[a]);

  const auto gone = multiply(fx.di, [](double t) { return t > 10.0 ? 1.0 : 0.0; }, x);
  CHECK(norm_mu(fx.di, gone) == 0.0);

  const auto u1 = apply_U(fx.di, basis_vector<double>(3, 0));
  const auto t_u1 = multiply_identity(fx.di, u1);
  CHECK(t_u1.values[0] == u1.values[0]);
}

TEST_CASE("multiplication algebra and self-adjointness", "[direct_integral][multiply][property]") {
  auto fx = registry_fixture("discrete_laplacian", 16);
  SplitMix64 rng(8);
  const auto x = apply_U(fx.di, random_unit_vector<double>(rng, 16));
  const auto y = apply_U(fx.di, random_unit_vector<double>(rng, 16));
  const auto f = [](double t) { return std::sin(t) + 0.5; };
  const auto h = [](double t) { return t * t - 1.0; };
  const auto nested = multiply(fx.di, f, multiply(fx.di, h, x));
  const auto joint = multiply(fx.di, [&](double t) { return f(t) * h(t); }, x);
  for (std::size_t a = 0; a < fx.di.atom_count(); ++a) {
    CHECK((nested.values[a] - joint.values[a]).norm() <= 1e-15 * (1.0 + joint.values[a].norm()));
  }
  CHECK(std::abs(inner_product_mu(fx.di, multiply(fx.di, f, x), y) -
                 inner_product_mu(fx.di, x, multiply(fx.di, f, y))) <= 1e-12);
}

TEST_CASE("intertwining residual", "[direct_integral][intertwining]") {
  auto fx = diag_fixture();
  const Vector<double> x = Vector<double>::Ones(3) / std::sqrt(3.0);
  CHECK(intertwining_residual(fx.di, fx.model, x) <= 1e-10);

  auto jf = registry_fixture("free_jacobi", 64);
  const auto& ev = jf.model.eigen.clusters[5].basis;
  CHECK(intertwining_residual(jf.di, jf.model, Vector<double>(ev.col(0))) <= 1e-12);
  SplitMix64 rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    worst = std::max(worst, intertwining_residual(jf.di, jf.model, random_unit_vector<double>(rng, 64)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("projection onto the range", "[direct_integral][project_onto_range]") {
  auto fx = registry_fixture("free_jacobi", 12);
  SplitMix64 rng(21);
  const auto x = apply_U(fx.di, random_unit_vector<double>(rng, 12));
  const auto same = project_onto_range(fx.di, 12, x);
  CHECK(norm_mu(fx.di, same - x) <= 1e-10);

  const auto u1 = apply_U(fx.di, basis_vector<double>(12, 0));
  for (Index m : {1, 4, 12}) CHECK(norm_mu(fx.di, project_onto_range(fx.di, m, u1) - u1) <= 1e-10);

  // U(e_5) is orthogonal to U(e_1), ..., U(e_4).
  const auto u5 = apply_U(fx.di, basis_vector<double>(12, 4));
  CHECK(norm_mu(fx.di, project_onto_range(fx.di, 4, u5)) <= 1e-10);

  // Idempotence and self-adjointness for a proper sub-range.
  auto z = multiply(fx.di, [](double t) { return t > 0.0 ? 1.0 : 0.0; }, x);
  const auto p = project_onto_range(fx.di, 5, z);
  CHECK(norm_mu(fx.di, project_onto_range(fx.di, 5, p) - p) <= 1e-10);
  const auto w = apply_U(fx.di, random_unit_vector<double>(rng, 12));
  CHECK(std::abs(inner_product_mu(fx.di, p, w) - inner_product_mu(fx.di, z, project_onto_range(fx.di, 5, w))) <= 1e-10);

  CHECK_THROWS_AS(project_onto_range(fx.di, 0, x), DimensionError);
  CHECK_THROWS_AS(project_onto_range(fx.di, 13, x), DimensionError);
}

TEST_CASE("projection onto the range commutes with indicators at full frame", "[direct_integral][property]") {
  auto fx = registry_fixture("free_jacobi", 16);
  SplitMix64 rng(2);
  const auto x = apply_U(fx.di, random_unit_vector<double>(rng, 16));
  const auto ind = [](double t) { return t >= -0.5 && t <= 1.0 ? 1.0 : 0.0; };
  const auto before = project_onto_range(fx.di, 16, multiply(fx.di, ind, x));
  const auto after = multiply(fx.di, ind, project_onto_range(fx.di, 16, x));
  CHECK(norm_mu(fx.di, before - after) <= 1e-10);
}

TEST_CASE("ill-conditioned range Gram is reported", "[direct_integral][errors]") {
  // With dropped atoms the sections of later basis vectors lose their mass,
  // so the full-frame Gram matrix is singular.
  auto fx = registry_fixture("harmonic_oscillator", 64);
  REQUIRE(fx.model.measure.dropped_atoms > 0);
  const auto x = apply_U(fx.di, basis_vector<double>(64, 0));
  CHECK_THROWS_AS(project_onto_range(fx.di, 64, x), ConditionError);
}

TEST_CASE("sections over different measures are rejected", "[direct_integral][errors]") {
  auto a = diag_fixture();
  auto b = registry_fixture("free_jacobi", 4);
  const auto xa = apply_U(a.di, basis_vector<double>(3, 0));
  const auto xb = apply_U(b.di, basis_vector<double>(4, 0));
  CHECK_THROWS_AS(inner_product_mu(a.di, xa, xb), MeasureMismatch);
  CHECK_THROWS_AS(norm_mu(b.di, xa), MeasureMismatch);
  CHECK_THROWS_AS(xa + xb, MeasureMismatch);
  CHECK_THROWS_AS(DirectIntegral<double>(a.model.measure.mu, {}), ValidationError);
}

TEST_CASE("section CSV dump", "[direct_integral][io]") {
  auto fx = diag_fixture();
  std::ostringstream os;
  const auto u1 = apply_U(fx.di, basis_vector<double>(3, 0));
  CHECK(u1.values[0](0) == Approx(std::sqrt(7.0 / 4.0)).epsilon(1e-15));
  write_section_csv(os, fx.di, u1);
  const std::string expected =
      "lambda,coord_index,value_re,value_im\n"
      "1,1," + format_number(u1.values[0](0)) + ",0\n"
      "2,2,0,0\n"
      "3,3,0,0\n";
  CHECK(os.str() == expected);
}
