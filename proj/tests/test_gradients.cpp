#include <cmath>

#include "doctest.h"
#include "qru/ansatz.hpp"
#include "qru/errors.hpp"
#include "qru/gradients.hpp"

using namespace qru;

namespace {

const DataSampler kUniformData = DataSampler::uniform(-M_PI, M_PI);

QruModel single_x_model() {
  ModelBuilder b(1);
  b.param(GeneratorSpec::pauli_string("X0")).observable(GeneratorSpec::pauli_string("Z0"));
  return b.build();
}

// P(Y+Y) E(X+X) P(ZZ): the data cannot be shifted into either parameter.
QruModel mismatched_model() {
  ModelBuilder b(2);
  b.param(GeneratorSpec::collective('Y'))
      .encode(GeneratorSpec::collective('X'))
      .param(GeneratorSpec::cyclic_zz())
      .observable(GeneratorSpec::pauli_string("Z0"));
  return b.build();
}

// Trace norm of a Hermitian matrix, written out for the oracle.
double oracle_trace_norm(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  return es.eigenvalues().cwiseAbs().sum();
}

// Exact theta averages on a uniform grid: every integrand below is a
// trigonometric polynomial in theta of degree < k, so the grid rule is exact.
double oracle_right_witness(const std::vector<double>& xs, int k) {
  const auto y = build_generator(GeneratorSpec::collective('Y'), 2);
  const auto x_all = build_generator(GeneratorSpec::collective('X'), 2);
  ComplexVector zero = ComplexVector::Zero(4);
  zero(0) = 1.0;
  double total = 0.0;
  for (double x : xs) {
    ComplexMatrix acc = ComplexMatrix::Zero(16, 16);
    for (int a = 0; a < k; ++a) {
      const double th = 2 * M_PI * a / k;
      const ComplexVector p0 = expm_i(y, th) * zero;
      const ComplexVector px = expm_i(x_all, x) * p0;
      const ComplexMatrix rx = px * px.adjoint(), r0 = p0 * p0.adjoint();
      acc += kron(rx, rx) - kron(r0, r0);
    }
    total += oracle_trace_norm(acc / k);
  }
  return total / static_cast<double>(xs.size());
}

double oracle_left_witness(const std::vector<double>& xs, int k) {
  const auto y = build_generator(GeneratorSpec::collective('Y'), 2);
  const auto x_all = build_generator(GeneratorSpec::collective('X'), 2);
  const auto zz = build_generator(GeneratorSpec::cyclic_zz(), 2);
  const ComplexMatrix h = build_generator(GeneratorSpec::pauli_string("Z0"), 2).matrix();
  double total = 0.0;
  for (double x : xs) {
    ComplexMatrix acc = ComplexMatrix::Zero(16, 16);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const ComplexMatrix u0 = expm_i(zz, 2 * M_PI * b / k) * expm_i(y, 2 * M_PI * a / k);
        const ComplexMatrix ux = expm_i(zz, 2 * M_PI * b / k) * expm_i(x_all, x) * expm_i(y, 2 * M_PI * a / k);
        const ComplexMatrix hx = ux.adjoint() * h * ux, h0 = u0.adjoint() * h * u0;
        acc += kron(hx, hx) - kron(h0, h0);
      }
    }
    total += oracle_trace_norm(acc / (k * k));
  }
  return total / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("variance_scan: constant landscape") {
  ModelBuilder b(2);
  b.param(GeneratorSpec::collective('X')).encode(GeneratorSpec::cyclic_zz()).param(GeneratorSpec::collective('Y'));
  b.observable(HermitianGenerator(ComplexMatrix::Identity(4, 4)));
  const auto m = b.build();
  const auto scan = variance_scan(m, ThetaSampler(m.n_params()), kUniformData, 200, 5, 3);
  CHECK(scan.mean_var.cwiseAbs().maxCoeff() < 1e-20);
  CHECK(scan.var_at_zero.cwiseAbs().maxCoeff() < 1e-20);
  CHECK(scan.grad_norm_mean < 1e-10);
}

TEST_CASE("variance_scan: single qubit variance is 2") {
  const auto m = single_x_model();
  const auto scan = variance_scan(m, ThetaSampler(1), DataSampler::dataset({0.0}), 10000, 1, 42);
  CHECK(std::abs(scan.var_at_zero(0) - 2.0) <= 3 * scan.var_at_zero_se(0));
  CHECK(scan.var_at_zero_se(0) > 0.0);
  CHECK(std::abs(scan.mean_grad(0, 0)) <= 4 * scan.mean_grad_se(0, 0));
  // E|dh| = E|2 sin 2 theta| = 4 / pi
  CHECK(std::abs(scan.grad_norm_mean - 4 / M_PI) <= 3 * scan.grad_norm_se);
}

TEST_CASE("variance_scan: shared generator keeps the variance") {
  ModelBuilder b(2);
  b.param(GeneratorSpec::collective('Y'))
      .param(GeneratorSpec::cyclic_zz())
      .encode(GeneratorSpec::cyclic_zz())
      .param(GeneratorSpec::collective('X'))
      .observable(GeneratorSpec::pauli_string("Z0"));
  const auto m = b.build();
  const auto scan = variance_scan(m, ThetaSampler(m.n_params()), kUniformData, 4000, 10, 8);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(scan.mean_var(j) - scan.var_at_zero(j)) <= 3 * scan.diff_se(j));
  }
}

TEST_CASE("variance_scan: zero-mean gradients and the Jensen chain") {
  CounterRng rng(808);
  RandomModelOptions opts;
  opts.dense_param_generators = false;
  opts.max_qubits = 3;
  for (int trial = 0; trial < 8; ++trial) {
    const QruModel m = random_model(rng, opts);
    if (m.n_params() == 0) continue;
    const auto scan = variance_scan(m, ThetaSampler(m.n_params()), kUniformData, 1000, 4, 100 + trial);
    for (Eigen::Index j = 0; j < scan.mean_var.size(); ++j) {
      CHECK(scan.mean_var(j) >= 0.0);
      CHECK(scan.var_at_zero(j) >= 0.0);
      CHECK(scan.var_of_mean(j) <= scan.mean_var(j) + 3 * scan.jensen_se(j) + 1e-12);
      for (Eigen::Index c = 0; c < scan.mean_grad.cols(); ++c) {
        CHECK(std::abs(scan.mean_grad(j, c)) <= 4 * scan.mean_grad_se(j, c) + 1e-12);
      }
    }
  }
}

TEST_CASE("variance_scan: arguments") {
  const auto m = single_x_model();
  CHECK_THROWS_AS(variance_scan(m, ThetaSampler(2), kUniformData, 10, 2, 1), ArityError);
  CHECK_THROWS_AS(variance_scan(m, ThetaSampler(1), kUniformData, 1, 2, 1), ValidationError);
  // n_theta = 2 cannot be batched; the fallback error is still positive.
  const auto tiny = variance_scan(m, ThetaSampler(1), kUniformData, 3, 2, 1);
  CHECK(tiny.mean_var_se(0) > 0.0);
  ScanOptions threaded;
  threaded.threads = 3;
  const auto a = variance_scan(m, ThetaSampler(1), kUniformData, 400, 3, 5);
  const auto b = variance_scan(m, ThetaSampler(1), kUniformData, 400, 3, 5, threaded);
  CHECK(a.mean_var == b.mean_var);
  CHECK(a.diff_se == b.diff_se);
}

TEST_CASE("witness: no encoding on the chosen side is exactly zero") {
  const auto m = mismatched_model();
  const auto w = absorption_witness(m, 0, WitnessSide::right, ThetaSampler(2), kUniformData, 100, 3, 1);
  CHECK(w.value == 0.0);
  CHECK(w.bias == 0.0);
  const auto base = base_pqc(m);
  const auto l = absorption_witness(base, 0, WitnessSide::left, ThetaSampler(2), kUniformData, 100, 3, 1);
  CHECK(l.value == 0.0);
}

TEST_CASE("witness: shared generator is absorbed") {
  ModelBuilder b(1);
  b.param(GeneratorSpec::pauli_string("X0")).encode(GeneratorSpec::pauli_string("X0"));
  b.observable(GeneratorSpec::pauli_string("Z0"));
  const auto m = b.build();
  const auto w = absorption_witness(m, 0, WitnessSide::left, ThetaSampler(1), kUniformData, 10000, 10, 4);
  CHECK(w.value >= 0.0);
  CHECK(w.value <= w.bias);
  const auto more = absorption_witness(m, 0, WitnessSide::left, ThetaSampler(1), kUniformData, 40000, 10, 4);
  CHECK(more.value < w.value);
}

TEST_CASE("witness: matches exact quadrature") {
  const auto m = mismatched_model();
  const std::vector<double> xs = {-2.0, -0.6, 0.4, 1.3, 2.9};
  const auto data = DataSampler::dataset(xs);
  const auto right = absorption_witness(m, 1, WitnessSide::right, ThetaSampler(2), data, 10000, 0, 11);
  const double exact_r = oracle_right_witness(xs, 32);
  CHECK(exact_r > 0.1);
  CHECK(std::abs(right.value - exact_r) <= 2 * right.bias);
  const auto left = absorption_witness(m, 0, WitnessSide::left, ThetaSampler(2), data, 10000, 0, 12);
  const double exact_l = oracle_left_witness(xs, 24);
  CHECK(exact_l > 0.1);
  CHECK(std::abs(left.value - exact_l) <= 2 * left.bias);
}

TEST_CASE("witness: seed stability") {
  const auto m = mismatched_model();
  const auto a = absorption_witness(m, 1, WitnessSide::right, ThetaSampler(2), kUniformData, 4000, 20, 1);
  const auto b = absorption_witness(m, 1, WitnessSide::right, ThetaSampler(2), kUniformData, 4000, 20, 2);
  CHECK(a.value > a.bias);
  CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.se, b.se) + std::max(a.bias, b.bias));
}

TEST_CASE("witness: size limit and arguments") {
  ModelBuilder b(6);
  b.param(GeneratorSpec::collective('X')).encode(GeneratorSpec::collective('Z'));
  const auto big = b.build();
  try {
    absorption_witness(big, 0, WitnessSide::left, ThetaSampler(1), kUniformData, 10, 1, 1);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.module() == "gradients");
  }
  const auto m = mismatched_model();
  CHECK_THROWS_AS(absorption_witness(m, 5, WitnessSide::left, ThetaSampler(2), kUniformData, 10, 1, 1),
                  OutOfRangeError);
}

TEST_CASE("layerwise witness") {
  const DataSampler data = kUniformData;
  SUBCASE("identity encoding") {
    ModelBuilder b(1);
    b.param(GeneratorSpec::pauli_string("Y0")).encode(HermitianGenerator(ComplexMatrix::Zero(2, 2)));
    const auto view = layered_view(b.build());
    const auto w = layerwise_witness(view.layers[0], 1, 0, ThetaSampler(1), data, 200, 5, 1);
    CHECK(w.value < 1e-12);
  }
  SUBCASE("single-qubit Haar blocks absorb local encodings") {
    ModelBuilder b(2);
    const std::size_t p0 = add_euler_block(b, 0);
    const std::size_t p1 = add_euler_block(b, 1);
    b.encode(GeneratorSpec::pauli_string("X0"));
    const auto m = b.build();
    std::vector<ThetaKind> kinds(m.n_params(), ThetaKind::uniform);
    kinds[p0] = kinds[p1] = ThetaKind::haar_polar;
    const auto w = layerwise_witness(layered_view(m).layers[0], 2, 0, ThetaSampler(kinds), data, 10000, 10, 2);
    CHECK(w.value <= w.bias);
  }
  SUBCASE("shared generator layer") {
    ModelBuilder b(2);
    b.param(GeneratorSpec::cyclic_zz()).encode(GeneratorSpec::cyclic_zz());
    const auto w = layerwise_witness(layered_view(b.build()).layers[0], 2, 0, ThetaSampler(1), data, 10000, 10, 3);
    CHECK(w.value <= w.bias);
  }
  SUBCASE("non-absorbable layer is positive") {
    ModelBuilder b(2);
    b.param(GeneratorSpec::cyclic_zz()).encode(GeneratorSpec::collective('X'));
    const auto w = layerwise_witness(layered_view(b.build()).layers[0], 2, 0, ThetaSampler(1), data, 10000, 10, 3);
    CHECK(w.value > 3 * w.bias);
  }
}

TEST_CASE("variance bound holds on random two-qubit models") {
  CounterRng rng(31337);
  RandomModelOptions opts;
  opts.min_qubits = opts.max_qubits = 2;
  opts.max_layers = 3;
  for (int trial = 0; trial < 4; ++trial) {
    const QruModel m = random_model(rng, opts);
    if (m.n_params() == 0) continue;
    const ThetaSampler ts(m.n_params());
    const auto scan = variance_scan(m, ts, kUniformData, 2000, 8, 50 + trial);
    for (std::size_t j = 0; j < m.n_params(); ++j) {
      const auto r = absorption_witness(m, j, WitnessSide::right, ts, kUniformData, 2000, 8, 60 + trial);
      const auto l = absorption_witness(m, j, WitnessSide::left, ts, kUniformData, 2000, 8, 70 + trial);
      CHECK(check_variance_bound(m, scan, r, l).pass);
    }
  }
}

namespace {

// Gate bound and layered bound at the first parameter of every layer.
void compare_bounds(const AnsatzInstance& inst) {
  const auto& m = inst.model;
  const auto view = layered_view(m);
  std::vector<WitnessEstimate> layers;
  for (std::size_t l = 0; l < view.count(); ++l) {
    layers.push_back(layerwise_witness(view.layers[l], m.n_qubits(), l, inst.sampler, kUniformData, 4000, 8, 90 + l));
  }
  const auto scan = variance_scan(m, inst.sampler, kUniformData, 1000, 8, 3);
  std::size_t j = 0;
  for (std::size_t l = 0; l < view.count(); ++l) {
    const auto r = absorption_witness(m, j, WitnessSide::right, inst.sampler, kUniformData, 4000, 8, 4);
    const auto lw = absorption_witness(m, j, WitnessSide::left, inst.sampler, kUniformData, 4000, 8, 5);
    const auto rep = check_variance_bound(m, scan, r, lw, layers);
    REQUIRE(rep.layered_rhs.has_value());
    CHECK(*rep.layered_rhs >= rep.rhs);
    for (const auto& step : view.layers[l].block) j += step.is_parameterized() ? 1 : 0;
  }
}

}  // namespace

TEST_CASE("layered bound is looser than the gate bound") {
  CounterRng rng(2);
  AnsatzSpec spec;
  spec.n_qubits = 2;
  spec.layers = 2;
  spec.family = AnsatzFamily::translation_invariant;
  for (int variant : {1, 2, 3}) {
    spec.variant = variant;
    compare_bounds(build_ansatz(spec, rng));
  }
  spec.family = AnsatzFamily::alternating_layered;
  compare_bounds(build_ansatz(spec, rng));
  spec.family = AnsatzFamily::permutation_a;
  compare_bounds(build_ansatz(spec, rng));
}

TEST_CASE("layerwise witness can vanish while the gate witness does not") {
  // Y, X, ZZ blocks with X/2 encodings: E[u (x) u] is annihilated by
  // V (x) V - I, yet the left witness of the first gate stays finite. The
  // layered bound therefore does not dominate the gate bound here.
  CounterRng rng(2);
  AnsatzSpec spec;
  spec.family = AnsatzFamily::permutation_b;
  spec.n_qubits = 2;
  spec.layers = 2;
  const auto inst = build_ansatz(spec, rng);
  const auto view = layered_view(inst.model);
  const auto data = DataSampler::dataset({-2.5, -1.0, 0.5, 1.7, 3.0});
  const auto a = layerwise_witness(view.layers[0], 2, 0, inst.sampler, data, 40000, 0, 90);
  const auto b = absorption_witness(inst.model, 0, WitnessSide::left, inst.sampler, data, 40000, 0, 5);
  CHECK(a.value <= a.bias);
  CHECK(b.value > 0.4);
  CHECK(b.value > 3 * b.bias);
}

TEST_CASE("check_variance_bound rejects mismatched witnesses") {
  const auto m = mismatched_model();
  const auto scan = variance_scan(m, ThetaSampler(2), kUniformData, 100, 2, 3);
  const auto r = absorption_witness(m, 0, WitnessSide::right, ThetaSampler(2), kUniformData, 100, 2, 4);
  const auto l = absorption_witness(m, 1, WitnessSide::left, ThetaSampler(2), kUniformData, 100, 2, 5);
  CHECK_THROWS_AS(check_variance_bound(m, scan, r, l), ValidationError);
  CHECK_THROWS_AS(check_variance_bound(m, scan, l, r), ValidationError);
}

TEST_CASE("information entropy of fixed sequences") {
  RealVector alt(101);
  for (int i = 0; i < 101; ++i) alt(i) = i % 2 ? -1.0 : 1.0;
  CHECK(information_entropy(alt, 0.5) == doctest::Approx(std::log(2.0) / std::log(6.0)));
  CHECK(information_entropy(alt, 2.0) == 0.0);
  RealVector cycle(601);
  // + 0 - + 0 - ... uses three of the six transitions equally.
  for (int i = 0; i < 601; ++i) cycle(i) = std::array<double, 3>{1.0, 0.0, -1.0}[static_cast<std::size_t>(i % 3)];
  CHECK(information_entropy(cycle, 0.5) == doctest::Approx(std::log(3.0) / std::log(6.0)));
}

TEST_CASE("information content") {
  SUBCASE("flat landscape") {
    ModelBuilder b(1);
    b.param(GeneratorSpec::pauli_string("X0")).observable(HermitianGenerator(ComplexMatrix::Identity(2, 2)));
    const auto ic = information_content(b.build(), ThetaSampler(1), 0.0, {}, {}, 1);
    CHECK(ic.grad_proxy == 0.0);
    CHECK(ic.eps_max == 0.0);
    RealVector grid(3);
    grid << 0.01, 0.1, 1.0;
    const auto fixed = information_content(b.build(), ThetaSampler(1), 0.0, {}, grid, 1);
    CHECK(fixed.entropy.isZero());
  }
  SUBCASE("cos 2 theta landscape") {
    // One parameter: a local walk makes consecutive increments nearly equal
    // in size, so the increments are probed at independent points instead.
    RandomWalk walk;
    walk.independent = true;
    const auto ic = information_content(single_x_model(), ThetaSampler(1), 0.0, walk, {}, 7);
    const double target = 4 / M_PI;
    CHECK(ic.grad_proxy >= target / 2);
    CHECK(ic.grad_proxy <= target * 2);
    CHECK(ic.entropy.maxCoeff() <= 1.0);
  }
  CHECK_THROWS_AS(information_content(single_x_model(), ThetaSampler(1), 0.0, {50, 0.05}, {}, 1), ValidationError);
}
