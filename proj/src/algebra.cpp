#include "qru/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include "qru/errors.hpp"

namespace qru {

HermitianGenerator::HermitianGenerator(ComplexMatrix matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
    throw InvalidDimensionError("generator matrix must be square and non-empty");
  }
  if (!matrix_.allFinite()) throw ValidationError("generator matrix has non-finite entries");
  const double scale = std::max(1.0, max_abs_entry(matrix_));
  if (max_abs_entry(matrix_ - matrix_.adjoint()) > kHermitianTol * scale) {
    throw ValidationError("generator matrix is not Hermitian" +
                          (label_.empty() ? std::string() : " (" + label_ + ")"));
  }
  // Symmetrize so round-off in the input cannot leak into the eigensolver.
  matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

double HermitianGenerator::max_abs_eigenvalue() const noexcept {
  if (eigenvalues_.size() == 0) return 0.0;
  return std::max(std::abs(eigenvalues_(0)), std::abs(eigenvalues_(eigenvalues_.size() - 1)));
}

std::vector<Eigenspace> HermitianGenerator::eigenspaces() const {
  std::vector<Eigenspace> groups;
  const double tol = kDegeneracyRelTol * std::max(max_abs_eigenvalue(), 1e-300);
  for (int i = 0; i < eigenvalues_.size(); ++i) {
    if (!groups.empty() && eigenvalues_(i) - groups.back().value <= tol) {
      groups.back().indices.push_back(i);
      continue;
    }
    groups.push_back({eigenvalues_(i), {i}});
  }
  for (auto& grp : groups) {
    double sum = 0.0;
    for (int i : grp.indices) sum += eigenvalues_(i);
    grp.value = sum / static_cast<double>(grp.indices.size());
  }
  return groups;
}

ComplexVector HermitianGenerator::apply_exp(double angle, const ComplexVector& state) const {
  ComplexVector coords = eigenvectors_.adjoint() * state;
  for (int i = 0; i < coords.size(); ++i) coords(i) *= std::polar(1.0, eigenvalues_(i) * angle);
  return eigenvectors_ * coords;
}

ComplexMatrix HermitianGenerator::apply_exp(double angle, const ComplexMatrix& states) const {
  ComplexMatrix coords = eigenvectors_.adjoint() * states;
  for (int i = 0; i < coords.rows(); ++i) coords.row(i) *= std::polar(1.0, eigenvalues_(i) * angle);
  return eigenvectors_ * coords;
}

ComplexMatrix HermitianGenerator::apply_exp_columns(const RealVector& angles,
                                                    const ComplexMatrix& states) const {
  ComplexMatrix coords = eigenvectors_.adjoint() * states;
  for (int c = 0; c < coords.cols(); ++c) {
    for (int i = 0; i < coords.rows(); ++i) {
      coords(i, c) *= std::polar(1.0, eigenvalues_(i) * angles(c));
    }
  }
  return eigenvectors_ * coords;
}

ComplexVector complex_gaussian(int dim, CounterRng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexVector z(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    z(i) = Complex(re, im);
  }
  return z;
}

ComplexMatrix haar_unitary(int dim, CounterRng& rng) {
  if (dim < 1) throw InvalidDimensionError("haar_unitary: dim must be >= 1");
  ComplexMatrix z(dim, dim);
  for (int c = 0; c < dim; ++c) z.col(c) = complex_gaussian(dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix& r = qr.matrixQR();
  for (int i = 0; i < dim; ++i) {
    const double mag = std::abs(r(i, i));
    const Complex phase = mag > 0.0 ? r(i, i) / mag : Complex(1.0, 0.0);
    q.col(i) *= phase;
  }
  return q;
}

ComplexMatrix haar_unitary(int dim, std::uint64_t seed) {
  CounterRng rng(seed);
  return haar_unitary(dim, rng);
}

ComplexMatrix expm_i(const HermitianGenerator& g, double angle) {
  ComplexVector phases(g.dim());
  for (int i = 0; i < g.dim(); ++i) phases(i) = std::polar(1.0, g.eigenvalues()(i) * angle);
  return g.eigenvectors() * phases.asDiagonal() * g.eigenvectors().adjoint();
}

double schatten_norm(const ComplexMatrix& a, SchattenOrder order) {
  if (a.rows() != a.cols()) throw InvalidDimensionError("schatten_norm: matrix must be square");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const RealVector& s = svd.singularValues();
  return order == SchattenOrder::trace ? s.sum() : s.maxCoeff();
}

GeneratorSpec GeneratorSpec::pauli_string(const std::string& text, double coeff) {
  GeneratorSpec spec;
  spec.kind = Kind::pauli_sum;
  spec.label = text;
  PauliTerm term;
  term.coeff = coeff;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') {
      ++i;
      continue;
    }
    if (c != 'X' && c != 'Y' && c != 'Z' && c != 'I') {
      throw ValidationError("pauli string: unexpected character '" + std::string(1, text[i]) +
                            "' in \"" + text + "\"");
    }
    ++i;
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) throw ValidationError("pauli string: missing qubit index in \"" + text + "\"");
    const int qubit = std::stoi(text.substr(i, j - i));
    if (c != 'I') term.ops.emplace_back(c, qubit);
    i = j;
  }
  spec.terms.push_back(std::move(term));
  return spec;
}

GeneratorSpec GeneratorSpec::collective(char pauli) {
  GeneratorSpec spec;
  spec.kind = Kind::collective;
  spec.pauli = static_cast<char>(std::toupper(static_cast<unsigned char>(pauli)));
  if (spec.pauli != 'X' && spec.pauli != 'Y' && spec.pauli != 'Z') {
    throw ValidationError("collective generator needs X, Y or Z");
  }
  spec.label = std::string("sum_") + spec.pauli;
  return spec;
}

GeneratorSpec GeneratorSpec::cyclic_zz() {
  GeneratorSpec spec;
  spec.kind = Kind::cyclic_zz;
  spec.label = "cyclic_ZZ";
  return spec;
}

GeneratorSpec GeneratorSpec::all_pairs_zz() {
  GeneratorSpec spec;
  spec.kind = Kind::all_pairs_zz;
  spec.label = "all_pairs_ZZ";
  return spec;
}

GeneratorSpec GeneratorSpec::explicit_matrix(ComplexMatrix m) {
  GeneratorSpec spec;
  spec.kind = Kind::explicit_matrix;
  spec.matrix = std::move(m);
  spec.label = "explicit";
  return spec;
}

GeneratorSpec GeneratorSpec::scaled(double factor, double identity_shift) const {
  GeneratorSpec out = *this;
  out.scale *= factor;
  out.shift = out.shift * factor + identity_shift;
  return out;
}

ComplexMatrix pauli_product_matrix(const std::vector<std::pair<char, int>>& ops, int n_qubits) {
  const std::int64_t dim = std::int64_t{1} << n_qubits;
  std::uint64_t xmask = 0;
  std::uint64_t zmask = 0;
  std::uint64_t used = 0;
  int y_count = 0;
  for (const auto& [op, q] : ops) {
    if (q < 0 || q >= n_qubits) {
      throw OutOfRangeError("qubit index " + std::to_string(q) + " out of range for " +
                            std::to_string(n_qubits) + " qubits");
    }
    const std::uint64_t bit = std::uint64_t{1} << q;
    if ((used & bit) != 0) {
      throw ValidationError("pauli product repeats qubit " + std::to_string(q));
    }
    used |= bit;
    switch (op) {
      case 'X': xmask |= bit; break;
      case 'Z': zmask |= bit; break;
      case 'Y':  // Y = i X Z
        xmask |= bit;
        zmask |= bit;
        ++y_count;
        break;
      case 'I': break;
      default: throw ValidationError(std::string("unknown Pauli operator '") + op + "'");
    }
  }
  // Operator = i^{y_count} X^{xmask} Z^{zmask}; Z acts first.
  Complex global(1.0, 0.0);
  for (int k = 0; k < (y_count % 4); ++k) global *= Complex(0.0, 1.0);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    const int zbits = __builtin_popcountll(static_cast<std::uint64_t>(i) & zmask);
    const double sign = (zbits % 2 == 0) ? 1.0 : -1.0;
    m(static_cast<std::int64_t>(static_cast<std::uint64_t>(i) ^ xmask), i) = global * sign;
  }
  return m;
}

HermitianGenerator build_generator(const GeneratorSpec& spec, int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw InvalidDimensionError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
  const std::int64_t dim = std::int64_t{1} << n_qubits;
  ComplexMatrix base = ComplexMatrix::Zero(dim, dim);
  switch (spec.kind) {
    case GeneratorSpec::Kind::pauli_sum:
      for (const auto& term : spec.terms) base += term.coeff * pauli_product_matrix(term.ops, n_qubits);
      break;
    case GeneratorSpec::Kind::collective:
      for (int q = 0; q < n_qubits; ++q) base += pauli_product_matrix({{spec.pauli, q}}, n_qubits);
      break;
    case GeneratorSpec::Kind::cyclic_zz:
      for (int q = 0; q < n_qubits; ++q) {
        const int next = (q + 1) % n_qubits;
        // A single qubit wraps onto itself: Z_0 Z_0 = I.
        base += next == q ? ComplexMatrix::Identity(dim, dim).eval()
                          : pauli_product_matrix({{'Z', q}, {'Z', next}}, n_qubits);
      }
      break;
    case GeneratorSpec::Kind::all_pairs_zz:
      for (int q = 0; q < n_qubits; ++q) {
        for (int r = q + 1; r < n_qubits; ++r) base += pauli_product_matrix({{'Z', q}, {'Z', r}}, n_qubits);
      }
      break;
    case GeneratorSpec::Kind::explicit_matrix:
      if (spec.matrix.rows() != dim || spec.matrix.cols() != dim) {
        throw InvalidDimensionError("explicit generator must be " + std::to_string(dim) + "x" +
                                    std::to_string(dim));
      }
      base = spec.matrix;
      break;
  }
  ComplexMatrix m = spec.scale * base;
  m.diagonal().array() += spec.shift;
  std::ostringstream label;
  label << spec.label;
  if (spec.scale != 1.0) label << "*" << spec.scale;
  if (spec.shift != 0.0) label << "+" << spec.shift << "I";
  return HermitianGenerator(std::move(m), label.str());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HermitianGenerator restrict_generator(const HermitianGenerator& g, const ComplexMatrix& basis) {
  if (basis.rows() != g.dim()) throw InvalidDimensionError("restrict_generator: basis dimension mismatch");
  return HermitianGenerator(basis.adjoint() * g.matrix() * basis, g.label() + "|restricted");
}

double max_abs_entry(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_unitary(const ComplexMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return max_abs_entry(u * u.adjoint() - ComplexMatrix::Identity(u.rows(), u.cols())) <= tol;
}

}  // namespace qru
