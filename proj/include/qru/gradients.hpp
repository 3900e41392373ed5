#pragma once

// Monte-Carlo gradient statistics over parameter space: variance scans,
// absorption witnesses, the variance-difference bound and the
// information-content gradient proxy.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qru/model.hpp"
#include "qru/sampling.hpp"

namespace qru {

struct ScanOptions {
  /// Theta draws are split into this many batches; standard errors of the
  /// variance estimators come from the spread of per-batch estimates.
  int batches = 20;
  int threads = 1;
};

struct VarianceScan {
  std::size_t n_theta = 0;
  std::size_t n_x = 0;
  std::size_t n_batches = 0;
  RealVector xs;

  // Per parameter j:
  RealVector mean_var;         // E_x Var_Theta d_j h(x)
  RealVector mean_var_se;
  RealVector var_at_zero;      // Var_Theta d_j h(0)
  RealVector var_at_zero_se;
  RealVector diff_se;          // standard error of mean_var - var_at_zero
  RealVector var_of_mean;      // Var_Theta E_x d_j h(x)
  RealVector jensen_se;        // standard error of mean_var - var_of_mean

  // mean_grad(j, c) = E_Theta d_j h(xs[c]) and its standard error.
  RealMatrix mean_grad;
  RealMatrix mean_grad_se;

  /// E_{Theta, x} ||grad h(x)||_2.
  double grad_norm_mean = 0.0;
  double grad_norm_se = 0.0;
};

/// Crossed design: every theta draw is evaluated at every data point and at
/// x = 0. A dataset sampler contributes all of its points.
VarianceScan variance_scan(const QruModel& model, const ThetaSampler& theta_sampler,
                           const DataSampler& data_sampler, std::size_t n_theta, std::size_t n_x,
                           std::uint64_t seed, const ScanOptions& options = {});

enum class WitnessSide { right, left, layerwise };

std::string side_name(WitnessSide side);

struct WitnessEstimate {
  WitnessSide side = WitnessSide::right;
  /// Trace norm of the theta-averaged difference operator, averaged over x.
  double value = 0.0;
  /// Gate (parameter) index j, or layer index for layerwise witnesses.
  std::size_t index = 0;
  std::size_t n_theta = 0;
  std::size_t n_x = 0;
  std::string data;
  /// Standard error of the x average (0 for a single data point).
  double se = 0.0;
  /// Upper bound on the upward Monte-Carlo bias of `value`: sqrt(rank) times
  /// the estimated Frobenius standard error of the averaged operator.
  double bias = 0.0;
  /// Bias estimate from half-sample splitting, assuming 1/sqrt(n) scaling.
  double half_split_bias = 0.0;
};

/// Right (state side) or left (observable side) witness of parameter j with
/// t = 2 copies. Models above five qubits are refused with a CapacityError.
WitnessEstimate absorption_witness(const QruModel& model, std::size_t j, WitnessSide side,
                                   const ThetaSampler& theta_sampler,
                                   const DataSampler& data_sampler, std::size_t n_theta,
                                   std::size_t n_x, std::uint64_t seed, int threads = 1);

/// E_x || E_theta [V(x)^{(x)2} u(theta)^{(x)2} - u(theta)^{(x)2}] ||_1 for one
/// layer of a layered view. Only the parameters used by the block are read
/// from each theta draw.
WitnessEstimate layerwise_witness(const Layer& layer, int n_qubits, std::size_t layer_index,
                                  const ThetaSampler& theta_sampler,
                                  const DataSampler& data_sampler, std::size_t n_theta,
                                  std::size_t n_x, std::uint64_t seed, int threads = 1);

struct VarianceBoundReport {
  std::size_t index = 0;
  /// |E_x Var d_j h(x) - Var d_j h(0)|
  double lhs = 0.0;
  /// 4 ||V_j||^2 (||H||^2 B_R + ||rho_0||^2 B_L)
  double rhs = 0.0;
  /// n_sigma times the combined standard error of lhs and rhs.
  double tolerance = 0.0;
  bool pass = false;
  /// 8 L ||V_j||^2 ||H||^2 ||rho_0||^2 max_l A_l, when layer witnesses are given.
  std::optional<double> layered_rhs;
};

VarianceBoundReport check_variance_bound(const QruModel& model, const VarianceScan& scan,
                                         const WitnessEstimate& right, const WitnessEstimate& left,
                                         const std::vector<WitnessEstimate>& layer_witnesses = {},
                                         double n_sigma = 3.0);

struct RandomWalk {
  std::size_t n_steps = 10000;
  double step_size = 0.05;
  /// false: theta_{t+1} = theta_t + step. true: every increment is probed at
  /// a fresh theta from the sampler, so consecutive increments are
  /// independent (needed when m is small and a local walk correlates them).
  bool independent = false;
};

struct InformationContent {
  RealVector eps;
  RealVector entropy;
  double eps_max = 0.0;
  double grad_proxy = 0.0;
};

/// Random walk with a random sign per coordinate at every step. An empty
/// eps grid selects 200 log-spaced values spanning the observed increments.
InformationContent information_content(const QruModel& model, const ThetaSampler& theta_sampler,
                                       double x, const RandomWalk& walk, const RealVector& eps_grid,
                                       std::uint64_t seed);

/// I(eps) from a sequence of landscape increments; exposed for testing.
double information_entropy(const RealVector& increments, double eps);

}  // namespace qru
