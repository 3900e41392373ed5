#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qru/ansatz.hpp"
#include "qru/errors.hpp"
#include "qru/harmonic.hpp"

using namespace qru;

namespace {

const RealVector kUnitMu = RealVector::Ones(1);

QruModel sine_model() {
  ModelBuilder b(1);
  b.fixed(expm_i(build_generator(GeneratorSpec::pauli_string("X0"), 1), M_PI / 4))
      .encode(GeneratorSpec::pauli_string("Z0"))
      .observable(GeneratorSpec::pauli_string("X0"));
  return b.build();
}

ComplexVector plus_state() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_CASE("init_harmonic") {
  ComplexVector zero(2);
  zero << 1.0, 0.0;
  const auto hs = init_harmonic(zero, kUnitMu);
  REQUIRE(hs.columns().size() == 1);
  CHECK(hs.columns().begin()->first == LatticePoint{0});
  CHECK(hs.total_norm() == 1.0);
  const auto hp = init_harmonic(plus_state(), kUnitMu);
  CHECK(std::abs(hp.columns().at({0})(1) - 1.0 / std::sqrt(2.0)) < 1e-15);
  ComplexVector bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(init_harmonic(bad, kUnitMu), ValidationError);
}

TEST_CASE("apply_unitary keeps per-k weights") {
  CounterRng rng(4);
  const auto z = build_generator(GeneratorSpec::pauli_string("Z0"), 1);
  auto hs = apply_encoding(init_harmonic(plus_state(), kUnitMu), z, decompose_spectrum(z).offsets);
  const auto before = frequency_weights(hs);
  const auto after = frequency_weights(apply_unitary(hs, haar_unitary(2, rng)));
  for (const auto& [k, w] : before) CHECK(std::abs(after.at(k) - w) < 1e-14);
  CHECK(frequency_weights(apply_unitary(hs, ComplexMatrix::Identity(2, 2))) == before);
  CHECK_THROWS_AS(apply_unitary(hs, ComplexMatrix::Identity(4, 4)), InvalidDimensionError);
}

TEST_CASE("apply_encoding examples") {
  const auto z = build_generator(GeneratorSpec::pauli_string("Z0"), 1);
  const auto offsets = decompose_spectrum(z).offsets;
  ComplexVector zero(2);
  zero << 1.0, 0.0;
  const auto a = apply_encoding(init_harmonic(zero, kUnitMu), z, offsets);
  REQUIRE(a.columns().size() == 1);
  CHECK(std::abs(a.columns().at({1})(0) - 1.0) < 1e-15);

  const auto w = frequency_weights(apply_encoding(init_harmonic(plus_state(), kUnitMu), z, offsets));
  CHECK(w.at({1}) == doctest::Approx(0.5));
  CHECK(w.at({-1}) == doctest::Approx(0.5));

  const HermitianGenerator zero_gen(ComplexMatrix::Zero(2, 2));
  const auto same = apply_encoding(init_harmonic(plus_state(), kUnitMu), zero_gen, decompose_spectrum(zero_gen).offsets);
  CHECK((same.columns().at({0}) - plus_state()).norm() < 1e-15);
}

TEST_CASE("worked single-qubit example") {
  const auto m = sine_model();
  const auto hs = simulate_harmonic(m, RealVector(0));
  const auto w = frequency_weights(hs);
  CHECK(w.size() == 2);
  CHECK(w.at({1}) == doctest::Approx(0.5));
  CHECK(w.at({-1}) == doctest::Approx(0.5));
  const auto p = measure_fourier(hs, m.observable());
  CHECK(std::abs(p.coefficient({2}) - Complex(0, -0.5)) < 1e-14);
  CHECK(std::abs(p.coefficient({-2}) - Complex(0, 0.5)) < 1e-14);
  CHECK(std::abs(p.coefficient({0})) < 1e-14);
  for (double x : {0.0, 0.3, 1.1}) CHECK(p.value(x) == doctest::Approx(std::sin(2 * x)));
}

TEST_CASE("identity observable gives a_0 = 1") {
  CounterRng rng(12);
  const QruModel m = random_model(rng);
  const RealVector theta = ThetaSampler(m.n_params()).sample(rng);
  const auto p = measure_fourier(simulate_harmonic(m, theta), HermitianGenerator(ComplexMatrix::Identity(m.dim(), m.dim())));
  for (const auto& [w, a] : p.coefficients()) {
    const bool zero = std::all_of(w.begin(), w.end(), [](int v) { return v == 0; });
    CHECK(std::abs(a - (zero ? Complex(1.0) : Complex(0.0))) < 1e-12);
  }
}

TEST_CASE("model without encodings is a single column") {
  ModelBuilder b(2);
  b.param(GeneratorSpec::collective('X')).param(GeneratorSpec::cyclic_zz());
  const auto m = b.build();
  RealVector theta(2);
  theta << 0.3, 1.7;
  const auto hs = simulate_harmonic(m, theta);
  REQUIRE(hs.columns().size() == 1);
  CHECK((hs.columns().begin()->second - evaluate_state(m, theta, 0.0)).norm() < 1e-13);
}

TEST_CASE("harmonic simulation reproduces the statevector") {
  CounterRng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const QruModel m = random_model(rng);
    const RealVector theta = ThetaSampler(m.n_params()).sample(rng);
    const auto hs = simulate_harmonic(m, theta);
    CHECK(std::abs(hs.total_norm() - 1.0) < 1e-10);
    const auto p = measure_fourier(hs, m.observable());
    double asym = 0.0, parseval = 0.0;
    for (const auto& [w, a] : p.coefficients()) {
      asym = std::max(asym, std::abs(a - std::conj(p.coefficient(negate_point(w)))));
      parseval += std::norm(a);
    }
    CHECK(asym <= 1e-10);
    CHECK(parseval <= p.observable_norm() * p.observable_norm() + 1e-10);
    for (int i = 0; i < 10; ++i) {
      const double x = 10 * rng.uniform() - 5;
      CHECK((hs.state_at(x) - evaluate_state(m, theta, x)).norm() < 1e-9);
      CHECK(std::abs(p.value(x) - hypothesis(m, theta, x)) < 1e-9);
    }
  }
}

TEST_CASE("Fourier coefficients match a DFT of sampled values") {
  CounterRng rng(5150);
  for (int trial = 0; trial < 5; ++trial) {
    const QruModel m = random_model(rng);
    const RealVector theta = ThetaSampler(m.n_params()).sample(rng);
    const auto p = measure_fourier(simulate_harmonic(m, theta), m.observable());
    const double mu = p.mu()(0);
    const int kmax = p.max_index();
    const int n = 2 * kmax + 1;
    const double period = 2 * M_PI / mu;
    RealVector xs(n);
    for (int j = 0; j < n; ++j) xs(j) = period * j / n;
    const RealVector hs = hypothesis_batch(m, theta, xs);
    for (int w = -kmax; w <= kmax; ++w) {
      Complex dft = 0.0;
      for (int j = 0; j < n; ++j) dft += hs(j) * std::polar(1.0, -mu * w * xs(j));
      dft /= static_cast<double>(n);
      CHECK(std::abs(dft - p.coefficient({w})) < 1e-8);
    }
  }
}

TEST_CASE("lattice growth stays within the support bound") {
  CounterRng rng(6);
  const int n = 3;
  const auto g = build_generator(GeneratorSpec::collective('X'), n);
  for (int L : {1, 3, 6}) {
    const QruModel m = haar_interleaved(n, L, g, g, rng);
    const auto hs = simulate_harmonic(m, RealVector(0));
    // eigenvalues +-1, +-3 on mu = 1: max |k| = 3 per layer
    CHECK(hs.columns().size() <= static_cast<std::size_t>(2 * L * 3 + 1));
  }
}

TEST_CASE("capacity overflow names the harmonic module") {
  CounterRng rng(6);
  const auto g = build_generator(GeneratorSpec::collective('X'), 2);
  const QruModel m = haar_interleaved(2, 6, g, g, rng);
  HarmonicOptions tight;
  tight.capacity = 5;
  try {
    simulate_harmonic(m, RealVector(0), std::nullopt, tight);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.module() == "harmonic");
  }
}

TEST_CASE("non-harmonic encodings with a supplied basis") {
  const double r2 = std::sqrt(2.0);
  ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
  a(0, 0) = r2;
  a(1, 1) = -r2;
  b(0, 0) = 1.0;
  b(1, 1) = -1.0;
  CounterRng rng(21);
  ModelBuilder mb(1);
  mb.fixed(haar_unitary(2, rng)).encode(HermitianGenerator(a)).fixed(haar_unitary(2, rng))
      .encode(HermitianGenerator(b)).fixed(haar_unitary(2, rng)).observable(GeneratorSpec::pauli_string("Z0"));
  const auto m = mb.build();
  CHECK_THROWS_AS(simulate_harmonic(m, RealVector(0)), AnharmonicError);
  RealVector mu(2);
  mu << r2, 1.0;
  const auto hs = simulate_harmonic(m, RealVector(0), mu);
  const auto p = measure_fourier(hs, m.observable());
  for (double x : {0.1, 1.7, 9.3}) CHECK(std::abs(p.value(x) - hypothesis(m, RealVector(0), x)) < 1e-10);
}

TEST_CASE("profile json shape") {
  const auto p = measure_fourier(simulate_harmonic(sine_model(), RealVector(0)), sine_model().observable());
  const auto j = profile_to_json(p);
  CHECK(j.contains("mu"));
  CHECK(j["entries"].is_array());
  CHECK(j["entries"][0].contains("re"));
}
