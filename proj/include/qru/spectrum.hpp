#pragma once

// Spectrum kernels: normalized eigenvalue multiplicities on an integer
// frequency lattice, base-frequency detection, sparse convolution and
// Gaussian-limit parameters.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"

#include "qru/algebra.hpp"

namespace qru {

/// Integer coordinates on the frequency lattice; physical frequency is mu . k.
using LatticePoint = std::vector<int>;

inline constexpr std::size_t kDefaultLatticeCapacity = 1'000'000;

struct FrequencyLattice {
  RealVector mu;
  /// Largest |k_d| per dimension over the populated points.
  std::vector<int> bounds;

  int dims() const noexcept { return static_cast<int>(mu.size()); }
  bool is_harmonic() const noexcept { return mu.size() == 1; }
  double frequency(const LatticePoint& k) const;
};

/// Same base-frequency vector within a relative tolerance.
bool same_basis(const RealVector& a, const RealVector& b, double rel_tol = 1e-9);

LatticePoint add_points(const LatticePoint& a, const LatticePoint& b);
LatticePoint negate_point(const LatticePoint& a);

class SpectrumKernel {
 public:
  SpectrumKernel() = default;
  SpectrumKernel(RealVector mu, std::map<LatticePoint, double> weights, int source_dim);

  /// {0: 1} on the given basis.
  static SpectrumKernel delta(const RealVector& mu);

  const RealVector& mu() const noexcept { return mu_; }
  int dims() const noexcept { return static_cast<int>(mu_.size()); }
  const std::map<LatticePoint, double>& weights() const noexcept { return weights_; }
  int source_dim() const noexcept { return source_dim_; }
  double weight(const LatticePoint& k) const;
  std::size_t size() const noexcept { return weights_.size(); }
  /// Largest |k_d| over the support, per dimension.
  std::vector<int> support_bounds() const;
  FrequencyLattice lattice() const { return {mu_, support_bounds()}; }
  /// k -> -k.
  SpectrumKernel reflected() const;

 private:
  RealVector mu_;
  std::map<LatticePoint, double> weights_;
  int source_dim_ = 1;
};

/// Largest mu such that every value is an integer multiple of it, or nullopt
/// if the values have no common rational structure (denominators <= 1e6).
/// All-zero input gives mu = 1.
std::optional<double> detect_base_frequency(const std::vector<double>& values);

/// Per-eigenvalue lattice offsets of a generator together with its kernel.
struct SpectrumDecomposition {
  SpectrumKernel kernel;
  /// offsets[i] is k(lambda_i) for the i-th eigenvector column of g.
  std::vector<LatticePoint> offsets;
};

/// With no hint the harmonic base frequency is detected; a one-entry hint
/// fixes mu; a D-entry hint decomposes each eigenvalue as mu . k with the
/// smallest-L1 integer vector k.
SpectrumDecomposition decompose_spectrum(const HermitianGenerator& g,
                                         const std::optional<RealVector>& mu_hint = std::nullopt);

SpectrumKernel extract_kernel(const HermitianGenerator& g,
                              const std::optional<RealVector>& mu_hint = std::nullopt);

SpectrumKernel convolve(const SpectrumKernel& a, const SpectrumKernel& b,
                        std::size_t capacity = kDefaultLatticeCapacity);
SpectrumKernel power_convolve(const SpectrumKernel& k, int L,
                              std::size_t capacity = kDefaultLatticeCapacity);

struct KernelMoments {
  RealVector mean;
  RealMatrix covariance;
};

/// Moments in lattice units; multiply by mu to get physical frequencies.
KernelMoments kernel_moments(const SpectrumKernel& k);

struct GaussianLimit {
  RealVector mean;
  RealMatrix covariance;

  /// Normal density at a lattice point (unit cell volume 1).
  double density(const LatticePoint& k) const;
};

GaussianLimit gaussian_limit(const SpectrumKernel& k, int L);

/// Total-variation distance between a kernel and the Gaussian density
/// sampled on the lattice; Gaussian mass off the kernel support counts fully.
double total_variation(const SpectrumKernel& k, const GaussianLimit& g);

nlohmann::ordered_json kernel_to_json(const SpectrumKernel& k);

}  // namespace qru
