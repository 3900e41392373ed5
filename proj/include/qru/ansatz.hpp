#pragma once

// Circuit families used by the experiments, plus random circuits for the
// statistical checks.

#include <optional>
#include <string>
#include <vector>

#include "qru/model.hpp"
#include "qru/rng.hpp"
#include "qru/sampling.hpp"

namespace qru {

enum class AnsatzFamily {
  alternating_layered,    // Euler single-qubit blocks + controlled X.Rz(x) on alternating pairs
  translation_invariant,  // variant 1: V={X}, g=ZZ; 2: V={X,ZZ}, g=ZZ; 3: V={X,ZZ}, g=Y
  permutation_a,          // V={ZZ over all pairs}, g = X/2
  permutation_b,          // V={Y, X, ZZ over all pairs}, g = X/2
  haar,                   // Haar blocks between encodings g = X/2 (one draw per model)
};

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::permutation_b;
  int n_qubits = 2;
  int layers = 1;
  /// Repetitions of the trainable block between encodings (ignored by haar).
  int depth = 1;
  /// translation_invariant model number (1..3).
  int variant = 1;
  /// alternating_layered: CNOTs on the encoding pairs after each encoding.
  bool entangling = false;
  /// permutation_a/b: repeat the parameter block after the last encoding.
  bool final_block = true;
  std::optional<GeneratorSpec> observable;
};

std::optional<AnsatzFamily> parse_family(const std::string& name);
std::string family_name(AnsatzFamily f);

/// Collective-X encoding scaled by 1/2, so each qubit contributes +-1/2.
GeneratorSpec half_collective_x();

struct AnsatzInstance {
  QruModel model;
  /// Natural parameter distribution (Euler polar angles use haar_polar).
  ThetaSampler sampler;
};

/// The haar family draws its blocks from `rng`; the others ignore it.
AnsatzInstance build_ansatz(const AnsatzSpec& spec, CounterRng& rng);

/// W_L e^{igx} ... W_1 e^{igx} W_0 with independent Haar W_l.
QruModel haar_interleaved(int n_qubits, int layers, const HermitianGenerator& g,
                          const HermitianGenerator& h, CounterRng& rng);

/// Adds exp(iZa) exp(iYb) exp(iZc) on one qubit; returns the index of the
/// Y parameter.
std::size_t add_euler_block(ModelBuilder& b, int qubit);

/// Orthonormal Dicke basis of the symmetric subspace (n + 1 columns).
ComplexMatrix symmetric_basis(int n_qubits);

ComplexMatrix cnot_matrix(int control, int target, int n_qubits);

struct RandomModelOptions {
  int min_qubits = 1;
  int max_qubits = 4;
  int max_layers = 8;
  int max_block = 3;
  double fixed_gate_probability = 0.2;
  /// Allow dense random Hermitian parameter generators. Their spectra are
  /// not integer-spaced, so h is not 2 pi periodic in those parameters.
  bool dense_param_generators = true;
  /// Allow Haar fixed gates between parameterized gates.
  bool fixed_gates = true;
};

/// Random layered circuit with mixed parameter generators (Pauli strings,
/// collective sums, cyclic ZZ, dense random Hermitian), Haar fixed gates and
/// encodings drawn from half-integer-spectrum families, so the joint
/// encoding spectrum is always harmonic.
QruModel random_model(CounterRng& rng, const RandomModelOptions& options = {});

}  // namespace qru
