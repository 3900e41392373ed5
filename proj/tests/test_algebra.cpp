#include <cmath>
#include <complex>

#include "doctest.h"
#include "qru/algebra.hpp"
#include "qru/errors.hpp"

using namespace qru;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("haar_unitary is unitary and deterministic") {
  for (int dim : {1, 2, 4, 7, 16, 64}) {
    const ComplexMatrix u = haar_unitary(dim, 7);
    CHECK(max_abs_entry(u * u.adjoint() - ComplexMatrix::Identity(dim, dim)) <= 1e-12);
    CHECK(max_abs_entry(u - haar_unitary(dim, 7)) == 0.0);
  }
  const ComplexMatrix s = haar_unitary(1, 123);
  CHECK(std::abs(std::abs(s(0, 0)) - 1.0) < 1e-14);
  CHECK_THROWS_AS(haar_unitary(0, 1), InvalidDimensionError);
}

TEST_CASE("haar_unitary second moment") {
  // E|U_00|^2 = 1/dim; for dim 2, |U_00|^2 is uniform on [0,1] (variance 1/12).
  CounterRng rng(99);
  const int samples = 100000;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) sum += std::norm(haar_unitary(2, rng)(0, 0));
  const double mean = sum / samples;
  const double se = std::sqrt(1.0 / 12.0 / samples);
  CHECK(std::abs(mean - 0.5) <= 3.0 * se);
}

TEST_CASE("expm_i examples") {
  const auto z = build_generator(GeneratorSpec::pauli_string("Z0"), 1);
  const auto x = build_generator(GeneratorSpec::pauli_string("X0"), 1);
  CHECK(max_abs_entry(expm_i(z, 0.0) - ComplexMatrix::Identity(2, 2)) < 1e-14);
  CHECK(max_abs_entry(expm_i(z, M_PI) + ComplexMatrix::Identity(2, 2)) < 1e-12);
  const ComplexMatrix ix = Complex(0.0, 1.0) * x.matrix();
  CHECK(max_abs_entry(expm_i(x, M_PI / 2) - ix) < 1e-12);
}

TEST_CASE("expm_i group law and unitarity") {
  CounterRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix a = haar_unitary(8, rng);
    const HermitianGenerator g(a + a.adjoint());
    const double s = rng.uniform() * 4 - 2, t = rng.uniform() * 4 - 2;
    CHECK(max_abs_entry(expm_i(g, s) * expm_i(g, t) - expm_i(g, s + t)) <= 1e-10);
    CHECK(is_unitary(expm_i(g, s), 1e-12));
  }
}

TEST_CASE("build_generator examples") {
  const auto x1 = build_generator(GeneratorSpec::collective('X'), 1);
  CHECK(x1.eigenvalues()(0) == doctest::Approx(-1.0));
  CHECK(x1.eigenvalues()(1) == doctest::Approx(1.0));

  const auto x2 = build_generator(GeneratorSpec::collective('X'), 2);
  const double expected2[] = {-2, 0, 0, 2};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(x2.eigenvalues()(i) - expected2[i]) < 1e-12);

  const auto zz = build_generator(GeneratorSpec::cyclic_zz(), 2);
  const ComplexMatrix z0z1 = pauli_product_matrix({{'Z', 0}, {'Z', 1}}, 2);
  CHECK(max_abs_entry(zz.matrix() - 2.0 * z0z1) < 1e-14);
  const double expected_zz[] = {-2, -2, 2, 2};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(zz.eigenvalues()(i) - expected_zz[i]) < 1e-12);
}

TEST_CASE("build_generator errors") {
  CHECK_THROWS_AS(build_generator(GeneratorSpec::pauli_string("X3"), 2), OutOfRangeError);
  ComplexMatrix m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS_AS(build_generator(GeneratorSpec::explicit_matrix(m), 1), ValidationError);
  CHECK_THROWS_AS(build_generator(GeneratorSpec::collective('X'), 13), InvalidDimensionError);
  CHECK_THROWS_AS(build_generator(GeneratorSpec::pauli_string("Z0 Z0"), 1), ValidationError);
}

TEST_CASE("pauli products follow the qubit-bit convention") {
  // X on qubit 1 of 2 flips bit 1: |00> -> |10> is basis index 0 -> 2.
  const ComplexMatrix x1 = pauli_product_matrix({{'X', 1}}, 2);
  CHECK(x1(2, 0) == Complex(1.0));
  const ComplexMatrix y = pauli_product_matrix({{'Y', 0}}, 1);
  CHECK(y(1, 0) == Complex(0.0, 1.0));
  CHECK(y(0, 1) == Complex(0.0, -1.0));
}

TEST_CASE("collective X spectrum is binomial") {
  for (int n = 1; n <= 8; ++n) {
    const auto g = build_generator(GeneratorSpec::collective('X'), n);
    for (int j = 0; j <= n; ++j) {
      const double value = n - 2.0 * j;
      int count = 0;
      for (int i = 0; i < g.dim(); ++i) count += std::abs(g.eigenvalues()(i) - value) < 1e-9;
      CHECK(count == static_cast<int>(binomial(n, j)));
    }
  }
}

TEST_CASE("generator invariants") {
  CounterRng rng(17);
  ComplexMatrix a = haar_unitary(16, rng);
  const HermitianGenerator g(a + a.adjoint(), "random");
  const ComplexMatrix& v = g.eigenvectors();
  CHECK(is_unitary(v, 1e-10));
  CHECK(max_abs_entry(v * g.eigenvalues().cast<Complex>().asDiagonal() * v.adjoint() - g.matrix()) <
        1e-10);
  for (int i = 1; i < g.dim(); ++i) CHECK(g.eigenvalues()(i - 1) <= g.eigenvalues()(i));
  CHECK(std::abs(schatten_norm(g.matrix(), SchattenOrder::spectral) - g.max_abs_eigenvalue()) < 1e-10);
}

TEST_CASE("schatten norms") {
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  CHECK(schatten_norm(id, SchattenOrder::trace) == doctest::Approx(4.0));
  CHECK(schatten_norm(id, SchattenOrder::spectral) == doctest::Approx(1.0));
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -1.0;
  CHECK(schatten_norm(d, SchattenOrder::trace) == doctest::Approx(4.0));
  CHECK(schatten_norm(d, SchattenOrder::spectral) == doctest::Approx(3.0));
  CHECK_THROWS(schatten_norm(ComplexMatrix::Zero(2, 3), SchattenOrder::trace));
}

TEST_CASE("eigenspaces group degenerate eigenvalues") {
  const auto g = build_generator(GeneratorSpec::collective('X'), 3);
  const auto spaces = g.eigenspaces();
  REQUIRE(spaces.size() == 4);
  CHECK(spaces[0].indices.size() == 1);
  CHECK(spaces[1].indices.size() == 3);
  CHECK(spaces[1].value == doctest::Approx(-1.0));
}

TEST_CASE("scaled specs shift by the identity") {
  const auto g = build_generator(GeneratorSpec::pauli_string("Z0").scaled(0.5, 0.5), 1);
  CHECK(g.eigenvalues()(0) == doctest::Approx(0.0));
  CHECK(g.eigenvalues()(1) == doctest::Approx(1.0));
}
