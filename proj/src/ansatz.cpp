#include "qru/ansatz.hpp"

#include <cmath>

#include "qru/errors.hpp"

namespace qru {

namespace {

int uniform_int(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

HermitianGenerator random_hermitian(int dim, CounterRng& rng) {
  ComplexMatrix a(dim, dim);
  for (int c = 0; c < dim; ++c) a.col(c) = complex_gaussian(dim, rng);
  ComplexMatrix h = 0.5 * (a + a.adjoint());
  h /= schatten_norm(h, SchattenOrder::spectral);
  return HermitianGenerator(h, "random");
}

GeneratorSpec random_pauli_string(int n, CounterRng& rng) {
  static const char kOps[] = {'X', 'Y', 'Z'};
  std::string text;
  for (int q = 0; q < n; ++q) {
    if (q == 0 || rng.uniform() < 0.5) {
      text += kOps[uniform_int(rng, 0, 2)];
      text += std::to_string(q) + " ";
    }
  }
  return GeneratorSpec::pauli_string(text);
}

HermitianGenerator random_param_generator(int n, CounterRng& rng, bool dense) {
  switch (uniform_int(rng, 0, dense ? 3 : 2)) {
    case 0: return build_generator(random_pauli_string(n, rng), n);
    case 1: return build_generator(GeneratorSpec::collective("XYZ"[uniform_int(rng, 0, 2)]), n);
    case 2: return build_generator(GeneratorSpec::cyclic_zz(), n);
    default: return random_hermitian(1 << n, rng);
  }
}

// Every family here has eigenvalues in (1/2) Z.
HermitianGenerator random_encoding_generator(int n, CounterRng& rng) {
  const int q = uniform_int(rng, 0, n - 1);
  switch (uniform_int(rng, 0, 4)) {
    case 0:
      return build_generator(GeneratorSpec::collective("XYZ"[uniform_int(rng, 0, 2)]).scaled(0.5), n);
    case 1: return build_generator(GeneratorSpec::pauli_string("Z" + std::to_string(q)), n);
    case 2:
      return build_generator(GeneratorSpec::pauli_string("Z" + std::to_string(q)).scaled(0.5, 0.5), n);
    case 3: return build_generator(GeneratorSpec::cyclic_zz(), n);
    default: return build_generator(random_pauli_string(n, rng), n);
  }
}

GeneratorSpec default_observable(AnsatzFamily f) {
  switch (f) {
    case AnsatzFamily::alternating_layered:
    case AnsatzFamily::translation_invariant: return GeneratorSpec::collective('X');
    default: return GeneratorSpec::pauli_string("Z0");
  }
}

}  // namespace

std::optional<AnsatzFamily> parse_family(const std::string& name) {
  if (name == "alternating_layered") return AnsatzFamily::alternating_layered;
  if (name == "translation_invariant") return AnsatzFamily::translation_invariant;
  if (name == "permutation_a" || name == "A") return AnsatzFamily::permutation_a;
  if (name == "permutation_b" || name == "B") return AnsatzFamily::permutation_b;
  if (name == "haar" || name == "C") return AnsatzFamily::haar;
  return std::nullopt;
}

std::string family_name(AnsatzFamily f) {
  switch (f) {
    case AnsatzFamily::alternating_layered: return "alternating_layered";
    case AnsatzFamily::translation_invariant: return "translation_invariant";
    case AnsatzFamily::permutation_a: return "permutation_a";
    case AnsatzFamily::permutation_b: return "permutation_b";
    case AnsatzFamily::haar: return "haar";
  }
  return "unknown";
}

GeneratorSpec half_collective_x() { return GeneratorSpec::collective('X').scaled(0.5); }

ComplexMatrix cnot_matrix(int control, int target, int n_qubits) {
  const int dim = 1 << n_qubits;
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const int j = ((i >> control) & 1) ? i ^ (1 << target) : i;
    u(j, i) = 1.0;
  }
  return u;
}

std::size_t add_euler_block(ModelBuilder& b, int qubit) {
  const int n = b.n_qubits();
  const auto z = build_generator(GeneratorSpec::pauli_string("Z" + std::to_string(qubit)), n);
  const auto y = build_generator(GeneratorSpec::pauli_string("Y" + std::to_string(qubit)), n);
  b.param(z);
  const std::size_t polar = b.n_params();
  b.param(y);
  b.param(z);
  return polar;
}

ComplexMatrix symmetric_basis(int n_qubits) {
  const int dim = 1 << n_qubits;
  ComplexMatrix basis = ComplexMatrix::Zero(dim, n_qubits + 1);
  for (int i = 0; i < dim; ++i) basis(i, __builtin_popcount(static_cast<unsigned>(i))) = 1.0;
  for (int w = 0; w <= n_qubits; ++w) basis.col(w).normalize();
  return basis;
}

QruModel haar_interleaved(int n_qubits, int layers, const HermitianGenerator& g,
                          const HermitianGenerator& h, CounterRng& rng) {
  ModelBuilder b(n_qubits);
  const int dim = 1 << n_qubits;
  b.fixed(haar_unitary(dim, rng), "haar");
  for (int l = 0; l < layers; ++l) {
    b.encode(g);
    b.fixed(haar_unitary(dim, rng), "haar");
  }
  b.observable(h);
  return b.build();
}

AnsatzInstance build_ansatz(const AnsatzSpec& spec, CounterRng& rng) {
  const int n = spec.n_qubits;
  if (spec.layers < 1) throw ValidationError("ansatz needs at least one layer");
  if (spec.depth < 1) throw ValidationError("ansatz depth must be at least 1");
  ModelBuilder b(n);
  const auto h = build_generator(spec.observable.value_or(default_observable(spec.family)), n);
  std::vector<std::size_t> polar;

  switch (spec.family) {
    case AnsatzFamily::alternating_layered: {
      if (n < 2) throw ValidationError("alternating_layered needs at least 2 qubits");
      for (int l = 0; l < spec.layers; ++l) {
        for (int r = 0; r < spec.depth; ++r) {
          for (int q = 0; q < n; ++q) polar.push_back(add_euler_block(b, q));
        }
        // C-(X Rz(x)) = CNOT . exp(-i x P1 (x) Z / 2) on each pair of this layer.
        GeneratorSpec enc;
        std::vector<std::pair<int, int>> pairs;
        for (int c = l % 2; c + 1 < n; c += 2) pairs.emplace_back(c, c + 1);
        if (pairs.empty()) pairs.emplace_back(0, 1);
        for (const auto& [c, t] : pairs) {
          // P1_c Z_t = (I - Z_c) Z_t / 2
          enc.terms.push_back({-0.25, {{'Z', t}}});
          enc.terms.push_back({0.25, {{'Z', c}, {'Z', t}}});
        }
        enc.label = "ctrl_rz";
        b.encode(enc);
        for (const auto& [c, t] : pairs) b.fixed(cnot_matrix(c, t, n), "cnot");
        if (spec.entangling) {
          for (int c = (l + 1) % 2; c + 1 < n; c += 2) b.fixed(cnot_matrix(c, c + 1, n), "cnot");
        }
      }
      for (int r = 0; r < spec.depth; ++r) {
        for (int q = 0; q < n; ++q) polar.push_back(add_euler_block(b, q));
      }
      break;
    }
    case AnsatzFamily::translation_invariant: {
      std::vector<GeneratorSpec> vs;
      GeneratorSpec g;
      switch (spec.variant) {
        case 1: vs = {GeneratorSpec::collective('X')}; g = GeneratorSpec::cyclic_zz(); break;
        case 2:
          vs = {GeneratorSpec::collective('X'), GeneratorSpec::cyclic_zz()};
          g = GeneratorSpec::cyclic_zz();
          break;
        case 3:
          vs = {GeneratorSpec::collective('X'), GeneratorSpec::cyclic_zz()};
          g = GeneratorSpec::collective('Y');
          break;
        default: throw ValidationError("translation_invariant variant must be 1, 2 or 3");
      }
      const auto enc = build_generator(g, n);
      std::vector<HermitianGenerator> params;
      for (const auto& v : vs) params.push_back(build_generator(v, n));
      for (int l = 0; l < spec.layers; ++l) {
        for (int r = 0; r < spec.depth; ++r) {
          for (const auto& p : params) b.param(p);
        }
        b.encode(enc);
      }
      break;
    }
    case AnsatzFamily::permutation_a:
    case AnsatzFamily::permutation_b: {
      std::vector<HermitianGenerator> params;
      if (spec.family == AnsatzFamily::permutation_a) {
        params.push_back(build_generator(GeneratorSpec::all_pairs_zz(), n));
      } else {
        for (const auto& v : {GeneratorSpec::collective('Y'), GeneratorSpec::collective('X'),
                              GeneratorSpec::all_pairs_zz()}) {
          params.push_back(build_generator(v, n));
        }
      }
      const auto enc = build_generator(half_collective_x(), n);
      for (int l = 0; l < spec.layers; ++l) {
        for (int r = 0; r < spec.depth; ++r) {
          for (const auto& p : params) b.param(p);
        }
        b.encode(enc);
      }
      if (spec.final_block) {
        for (int r = 0; r < spec.depth; ++r) {
          for (const auto& p : params) b.param(p);
        }
      }
      break;
    }
    case AnsatzFamily::haar: {
      const auto enc = build_generator(half_collective_x(), n);
      QruModel m = haar_interleaved(n, spec.layers, enc, h, rng);
      return {std::move(m), ThetaSampler(std::size_t{0})};
    }
  }
  b.observable(h);
  QruModel model = b.build();
  std::vector<ThetaKind> kinds(model.n_params(), ThetaKind::uniform);
  for (std::size_t i : polar) kinds[i] = ThetaKind::haar_polar;
  return {std::move(model), ThetaSampler(std::move(kinds))};
}

QruModel random_model(CounterRng& rng, const RandomModelOptions& options) {
  const int n = uniform_int(rng, options.min_qubits, options.max_qubits);
  const int layers = uniform_int(rng, 1, options.max_layers);
  const int dim = 1 << n;
  ModelBuilder b(n);
  auto add_block = [&] {
    const int size = uniform_int(rng, 1, options.max_block);
    for (int i = 0; i < size; ++i) {
      if (options.fixed_gates && rng.uniform() < options.fixed_gate_probability) {
        b.fixed(haar_unitary(dim, rng), "haar");
      } else {
        b.param(random_param_generator(n, rng, options.dense_param_generators));
      }
    }
  };
  for (int l = 0; l < layers; ++l) {
    add_block();
    b.encode(random_encoding_generator(n, rng));
  }
  if (rng.uniform() < 0.5) add_block();
  switch (uniform_int(rng, 0, 2)) {
    case 0: b.observable(GeneratorSpec::pauli_string("Z0")); break;
    case 1: b.observable(GeneratorSpec::collective('X')); break;
    default: b.observable(random_hermitian(dim, rng)); break;
  }
  return b.build();
}

}  // namespace qru
