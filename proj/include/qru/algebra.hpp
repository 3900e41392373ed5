#pragma once

// Dense complex linear algebra for small (n <= 12 qubit) systems: Hermitian
// generators with cached eigendecompositions, matrix exponentials, Haar
// sampling and the standard generator families used by the ansatz builders.

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qru/rng.hpp"

namespace qru {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr int kMaxQubits = 12;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDegeneracyRelTol = 1e-9;

/// A set of (numerically) equal eigenvalues and the eigenvector columns
/// spanning the eigenspace.
struct Eigenspace {
  double value = 0.0;
  std::vector<int> indices;
};

/// Hermitian matrix with its eigendecomposition. Immutable after
/// construction; eigenvalues ascending, eigenvector columns orthonormal.
class HermitianGenerator {
 public:
  HermitianGenerator() = default;
  explicit HermitianGenerator(ComplexMatrix matrix, std::string label = {});

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
  const ComplexMatrix& eigenvectors() const noexcept { return eigenvectors_; }
  const std::string& label() const noexcept { return label_; }
  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }

  /// max |lambda|; this is ||A||_inf for Hermitian A.
  double max_abs_eigenvalue() const noexcept;

  /// Eigenvalues grouped within kDegeneracyRelTol * max|lambda|.
  std::vector<Eigenspace> eigenspaces() const;

  /// exp(i * angle * A) applied to a state (two mat-vec products).
  ComplexVector apply_exp(double angle, const ComplexVector& state) const;
  /// exp(i * angle * A) applied column-wise to a block of states.
  ComplexMatrix apply_exp(double angle, const ComplexMatrix& states) const;
  /// Column c multiplied by exp(i * angles[c] * A).
  ComplexMatrix apply_exp_columns(const RealVector& angles, const ComplexMatrix& states) const;

 private:
  ComplexMatrix matrix_;
  RealVector eigenvalues_;
  ComplexMatrix eigenvectors_;
  std::string label_;
};

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// diagonal phases of R moved into Q.
ComplexMatrix haar_unitary(int dim, std::uint64_t seed);
ComplexMatrix haar_unitary(int dim, CounterRng& rng);

/// V diag(exp(i lambda angle)) V^dagger.
ComplexMatrix expm_i(const HermitianGenerator& g, double angle);

enum class SchattenOrder { trace, spectral };

double schatten_norm(const ComplexMatrix& a, SchattenOrder order);

/// One term of a Pauli sum, e.g. {1.0, {{'Z', 0}, {'Z', 1}}} for Z_0 Z_1.
struct PauliTerm {
  double coeff = 1.0;
  std::vector<std::pair<char, int>> ops;
};

/// Declarative description of a generator. The resulting matrix is
/// `scale * base + shift * I`.
struct GeneratorSpec {
  enum class Kind { pauli_sum, collective, cyclic_zz, all_pairs_zz, explicit_matrix };

  Kind kind = Kind::pauli_sum;
  std::vector<PauliTerm> terms;  // pauli_sum
  char pauli = 'X';              // collective
  ComplexMatrix matrix;          // explicit_matrix
  double scale = 1.0;
  double shift = 0.0;
  std::string label;

  /// Parses strings like "Z0 Z1" or "X2".
  static GeneratorSpec pauli_string(const std::string& text, double coeff = 1.0);
  /// sum_q P_q
  static GeneratorSpec collective(char pauli);
  /// sum_q Z_q Z_{(q+1) mod n}
  static GeneratorSpec cyclic_zz();
  /// sum_{q < r} Z_q Z_r, invariant under every qubit permutation
  static GeneratorSpec all_pairs_zz();
  static GeneratorSpec explicit_matrix(ComplexMatrix m);

  GeneratorSpec scaled(double factor, double identity_shift = 0.0) const;
};

HermitianGenerator build_generator(const GeneratorSpec& spec, int n_qubits);

/// Matrix of a Pauli product on n qubits; qubit q is bit q of the basis index.
ComplexMatrix pauli_product_matrix(const std::vector<std::pair<char, int>>& ops, int n_qubits);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// B^dagger A B for an orthonormal column basis B; the generator of A
/// restricted to span(B).
HermitianGenerator restrict_generator(const HermitianGenerator& g, const ComplexMatrix& basis);

double max_abs_entry(const ComplexMatrix& a);
bool is_unitary(const ComplexMatrix& u, double tol = 1e-10);

/// Standard complex Gaussian vector (E|z_i|^2 = 1).
ComplexVector complex_gaussian(int dim, CounterRng& rng);

}  // namespace qru
