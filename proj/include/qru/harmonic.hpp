#pragma once

// Frequency-resolved statevector simulation. The state after a re-uploading
// circuit is psi(x) = sum_k c_k exp(i (mu . k) x); each column c_k is a
// 2^n vector and columns are stored sparsely by lattice point.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"

#include "qru/algebra.hpp"
#include "qru/model.hpp"
#include "qru/spectrum.hpp"

namespace qru {

struct HarmonicOptions {
  std::size_t capacity = kDefaultLatticeCapacity;
  double prune_tol = 1e-14;
};

class HarmonicState {
 public:
  HarmonicState(int n_qubits, RealVector mu, std::map<LatticePoint, ComplexVector> columns);

  int n_qubits() const noexcept { return n_qubits_; }
  int dim() const noexcept { return 1 << n_qubits_; }
  const RealVector& mu() const noexcept { return mu_; }
  const std::map<LatticePoint, ComplexVector>& columns() const noexcept { return columns_; }
  FrequencyLattice lattice() const;
  double total_norm() const;

  /// psi(x) = sum_k c_k exp(i (mu . k) x).
  ComplexVector state_at(double x) const;

 private:
  int n_qubits_;
  RealVector mu_;
  std::map<LatticePoint, ComplexVector> columns_;
};

HarmonicState init_harmonic(const ComplexVector& state, const RealVector& mu);
HarmonicState apply_unitary(const HarmonicState& hs, const ComplexMatrix& u);
/// `offsets[i]` is the lattice shift of the i-th eigenvector column of g.
HarmonicState apply_encoding(const HarmonicState& hs, const HermitianGenerator& g,
                             const std::vector<LatticePoint>& offsets,
                             const HarmonicOptions& options = {});

/// Base-frequency vector shared by every encoding generator of the model.
/// Without a hint the pooled encoding spectrum must be harmonic.
RealVector joint_mu(const QruModel& model, const std::optional<RealVector>& mu_hint = std::nullopt);

HarmonicState simulate_harmonic(const QruModel& model, const RealVector& theta,
                                const std::optional<RealVector>& mu_hint = std::nullopt,
                                const HarmonicOptions& options = {});

/// Per-k weights sum_j |c_{j,k}|^2.
std::map<LatticePoint, double> frequency_weights(const HarmonicState& hs);

class FrequencyProfile {
 public:
  FrequencyProfile() = default;
  FrequencyProfile(RealVector mu, std::map<LatticePoint, Complex> coefficients,
                   double observable_norm);

  const RealVector& mu() const noexcept { return mu_; }
  const std::map<LatticePoint, Complex>& coefficients() const noexcept { return coefficients_; }
  double observable_norm() const noexcept { return observable_norm_; }
  Complex coefficient(const LatticePoint& w) const;
  double frequency(const LatticePoint& w) const;
  /// Largest |w_d| over all coefficients.
  int max_index() const;

  double value(double x) const;
  double derivative(double x) const;

 private:
  RealVector mu_;
  std::map<LatticePoint, Complex> coefficients_;
  double observable_norm_ = 0.0;
};

FrequencyProfile measure_fourier(const HarmonicState& hs, const HermitianGenerator& h);

nlohmann::ordered_json profile_to_json(const FrequencyProfile& p);

}  // namespace qru
