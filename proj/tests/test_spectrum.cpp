#include <cmath>

#include "doctest.h"
#include "qru/ansatz.hpp"
#include "qru/errors.hpp"
#include "qru/spectrum.hpp"

using namespace qru;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

SpectrumKernel coin() {
  return SpectrumKernel(RealVector::Ones(1), {{{0}, 0.5}, {{1}, 0.5}}, 2);
}

HermitianGenerator diagonal(const std::vector<double>& values) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(values.size()),
                                        static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  return HermitianGenerator(m);
}

SpectrumKernel random_kernel(CounterRng& rng) {
  std::map<LatticePoint, double> w;
  const int size = 1 + static_cast<int>(rng.uniform() * 6);
  for (int i = 0; i < size; ++i) w[{static_cast<int>(rng.uniform() * 9) - 4}] += 0.05 + rng.uniform();
  double total = 0;
  for (auto& [k, v] : w) total += v;
  for (auto& [k, v] : w) v /= total;
  return SpectrumKernel(RealVector::Ones(1), w, 4);
}

}  // namespace

TEST_CASE("extract_kernel examples") {
  const auto z = extract_kernel(build_generator(GeneratorSpec::pauli_string("Z0"), 1));
  CHECK(z.mu()(0) == doctest::Approx(1.0));
  CHECK(z.weight({-1}) == doctest::Approx(0.5));
  CHECK(z.weight({1}) == doctest::Approx(0.5));

  const auto shifted = extract_kernel(build_generator(GeneratorSpec::pauli_string("Z0").scaled(0.5, 0.5), 1));
  CHECK(shifted.mu()(0) == doctest::Approx(1.0));
  CHECK(shifted.weight({0}) == doctest::Approx(0.5));
  CHECK(shifted.weight({1}) == doctest::Approx(0.5));

  const auto x4 = extract_kernel(build_generator(GeneratorSpec::collective('X'), 4));
  CHECK(x4.mu()(0) == doctest::Approx(2.0));
  const double expected[] = {1, 4, 6, 4, 1};
  for (int k = -2; k <= 2; ++k) CHECK(std::abs(x4.weight({k}) - expected[k + 2] / 16) < 1e-15);
  const auto m = kernel_moments(x4);
  CHECK(std::abs(m.mean(0)) < 1e-15);
  CHECK(std::abs(m.covariance(0, 0) - 1.0) < 1e-14);
}

TEST_CASE("non-harmonic two-dimensional kernel") {
  const double r2 = std::sqrt(2.0);
  const auto g = diagonal({-(r2 + 1), -r2, -1, 0, 0, 1, r2, r2 + 1});
  CHECK_THROWS_AS(extract_kernel(g), AnharmonicError);
  RealVector mu(2);
  mu << r2, 1.0;
  const auto k = extract_kernel(g, mu);
  const double expected[3][3] = {{1, 1, 0}, {1, 2, 1}, {0, 1, 1}};
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) CHECK(std::abs(k.weight({a, b}) - expected[a + 1][b + 1] / 8) < 1e-15);
  }
  for (int L : {1, 2, 5, 20}) {
    const auto cov = kernel_moments(power_convolve(k, L)).covariance;
    RealMatrix want(2, 2);
    want << 1, 0.5, 0.5, 1;
    want *= L / 2.0;
    CHECK((cov - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("base frequency detection") {
  CHECK(*detect_base_frequency({0.0, 0.0}) == 1.0);
  CHECK(*detect_base_frequency({-1.5, 0.5, 2.5}) == doctest::Approx(0.5));
  CHECK(*detect_base_frequency({-2.0, 3.0}) == doctest::Approx(1.0));
  CHECK(*detect_base_frequency({1.0 / 3.0, 1.0}) == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(detect_base_frequency({1.0, std::sqrt(2.0)}).has_value());
  CHECK_FALSE(detect_base_frequency({1.0, M_PI}).has_value());
}

TEST_CASE("decomposition offsets follow eigenvector order") {
  const auto g = build_generator(GeneratorSpec::collective('X').scaled(0.5), 3);
  const auto d = decompose_spectrum(g);
  CHECK(d.kernel.mu()(0) == doctest::Approx(0.5));
  for (int i = 0; i < g.dim(); ++i) {
    CHECK(std::abs(d.offsets[static_cast<std::size_t>(i)][0] * 0.5 - g.eigenvalues()(i)) < 1e-12);
  }
  CHECK_THROWS_AS(decompose_spectrum(g, RealVector::Constant(1, 1.0)), LatticeMismatchError);
}

TEST_CASE("convolution examples") {
  const auto c = coin();
  const auto delta = SpectrumKernel::delta(RealVector::Ones(1));
  CHECK(convolve(delta, c).weights() == c.weights());
  const auto two = convolve(c, c);
  CHECK(two.weight({0}) == 0.25);
  CHECK(two.weight({1}) == 0.5);
  CHECK(two.weight({2}) == 0.25);
  CHECK_THROWS_AS(convolve(c, SpectrumKernel::delta(RealVector::Constant(1, 2.0))), LatticeMismatchError);
}

TEST_CASE("binomial and geometric families are exact") {
  const auto c = coin();
  for (int L = 1; L <= 20; ++L) {
    const auto k = power_convolve(c, L);
    CHECK(k.size() == static_cast<std::size_t>(L + 1));
    double worst = 0.0;
    for (int j = 0; j <= L; ++j) worst = std::max(worst, std::abs(k.weight({j}) - binomial(L, j) / std::ldexp(1.0, L)));
    CHECK(worst <= 1e-12);
  }
  for (int L = 1; L <= 10; ++L) {
    SpectrumKernel acc = SpectrumKernel::delta(RealVector::Ones(1));
    for (int l = 0; l < L; ++l) {
      const auto g = build_generator(GeneratorSpec::pauli_string("Z0").scaled(0.5 * std::ldexp(1.0, l), 0.5 * std::ldexp(1.0, l)), 1);
      acc = convolve(acc, extract_kernel(g, RealVector::Ones(1)));
    }
    CHECK(acc.size() == static_cast<std::size_t>(1 << L));
    double worst = 0.0;
    for (int j = 0; j < (1 << L); ++j) worst = std::max(worst, std::abs(acc.weight({j}) - std::ldexp(1.0, -L)));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("moment additivity and power laws") {
  CounterRng rng(314);
  for (int trial = 0; trial < 10; ++trial) {
    const auto k = random_kernel(rng);
    const auto m1 = kernel_moments(k);
    for (int L : {2, 3, 7, 12}) {
      const auto kl = power_convolve(k, L);
      const auto ml = kernel_moments(kl);
      CHECK(std::abs(ml.covariance(0, 0) - L * m1.covariance(0, 0)) <= 1e-12 * std::max(1.0, L * m1.covariance(0, 0)));
      CHECK(std::abs(ml.mean(0) - L * m1.mean(0)) <= 1e-12 * std::max(1.0, std::abs(L * m1.mean(0))));
      double total = 0;
      for (const auto& [p, w] : kl.weights()) total += w;
      CHECK(std::abs(total - 1.0) <= 1e-12);
      // Support bound: k^{*L} lives in L * [min, max].
      const int lo = k.weights().begin()->first[0], hi = k.weights().rbegin()->first[0];
      CHECK(kl.weights().begin()->first[0] == L * lo);
      CHECK(kl.weights().rbegin()->first[0] == L * hi);
    }
    const auto a = power_convolve(k, 3), b = power_convolve(k, 4);
    const auto ab = convolve(a, b), direct = power_convolve(k, 7);
    double worst = 0;
    for (const auto& [p, w] : direct.weights()) worst = std::max(worst, std::abs(w - ab.weight(p)));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("extract_kernel reproduces binomial multiplicities") {
  for (int n = 1; n <= 10; ++n) {
    const auto k = extract_kernel(build_generator(GeneratorSpec::collective('X'), n));
    for (int j = 0; j <= n; ++j) {
      // eigenvalue n - 2j on mu = 2 (n even) or mu = 1 (n odd)
      const int idx = (n - 2 * j) / static_cast<int>(std::lround(k.mu()(0)));
      CHECK(k.weight({idx}) == binomial(n, j) / std::ldexp(1.0, n));
    }
  }
}

TEST_CASE("gaussian limit") {
  const auto c = coin();
  const auto g100 = gaussian_limit(c, 100);
  CHECK(g100.covariance(0, 0) == doctest::Approx(25.0));
  const auto k40 = power_convolve(c, 40);
  CHECK(total_variation(k40, gaussian_limit(c, 1 * 40)) <= 0.05);

  const auto flat = extract_kernel(restrict_generator(
      build_generator(half_collective_x(), 4), symmetric_basis(4)));
  CHECK(kernel_moments(flat).covariance(0, 0) == doctest::Approx(4.0 * 6.0 / 12.0));
  const auto bin = extract_kernel(build_generator(half_collective_x(), 4));
  CHECK(kernel_moments(bin).covariance(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("kernel json shape") {
  const auto j = kernel_to_json(coin());
  CHECK(j["mu"][0] == 1.0);
  CHECK(j["N"] == 2);
  CHECK(j["weights"].size() == 2);
  CHECK(j["weights"][1]["k"][0] == 1);
}

TEST_CASE("capacity errors name the module") {
  try {
    power_convolve(coin(), 50, 10);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.module() == "spectrum");
  }
}
