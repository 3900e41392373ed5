#pragma once

// Dirichlet distributions over frequency weights: parameters from spectrum
// kernels, sampling, exact moments and the tail bounds for the Lipschitz
// constant.

#include <vector>

#include "qru/algebra.hpp"
#include "qru/rng.hpp"
#include "qru/spectrum.hpp"

namespace qru {

inline constexpr double kTailEpsilon = 1e-10;

class DirichletParams {
 public:
  explicit DirichletParams(RealVector alpha, std::vector<LatticePoint> points = {});

  const RealVector& alpha() const noexcept { return alpha_; }
  /// Lattice point of each coordinate (empty if not built from a kernel).
  const std::vector<LatticePoint>& points() const noexcept { return points_; }
  double alpha_sum() const noexcept { return alpha_sum_; }
  int size() const noexcept { return static_cast<int>(alpha_.size()); }

  double mean(int i) const;
  double variance(int i) const;
  double covariance(int i, int j) const;
  /// Merge coordinates i and j into one (aggregation property).
  DirichletParams aggregate(int i, int j) const;

 private:
  RealVector alpha_;
  std::vector<LatticePoint> points_;
  double alpha_sum_ = 0.0;
};

/// alpha_k = N * weight_k with N the dimension of the kernel's source matrix
/// (2^n for an n-qubit generator).
DirichletParams params_from_kernel(const SpectrumKernel& k);
DirichletParams params_from_kernel(const SpectrumKernel& k, int n_qubits);

RealVector dirichlet_sample(const DirichletParams& p, CounterRng& rng);
RealVector dirichlet_sample(const DirichletParams& p, std::uint64_t seed);

/// E[prod x_i^{k_i}] via log-gamma.
double dirichlet_moment(const DirichletParams& p, const std::vector<int>& k);

/// E|a_k| <= alpha / (alpha + 1/2) (which never exceeds 2 alpha).
double expected_abs_coeff_bound(double alpha);

/// Value below which a Dir(alpha) marginal stays with probability 1 - eps.
double x_m(double alpha, double eps = kTailEpsilon);

enum class TailMode { coarse, refined };

/// Hoeffding denominator sum_i (b_i - a_i)^2 for Lambda in physical units:
/// 2 sum_{n>=1} (mu n ||H||)^2 x_n with x_n = 1 (coarse, up to the support
/// edge) or x_M(alpha_n) for the Dirichlet parameters of K^{*L} * K'^{*L}.
double tail_denominator(const SpectrumKernel& kernel, int L, TailMode mode,
                        double observable_norm = 1.0, double eps = kTailEpsilon);

/// (1/2) exp(-t^2 / tail_denominator).
double tail_bound(double t, const SpectrumKernel& kernel, int L, TailMode mode,
                  double observable_norm = 1.0, double eps = kTailEpsilon);

}  // namespace qru
