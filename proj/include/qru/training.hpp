#pragma once

// Fitting a model to a periodic target on a uniform grid by plain gradient
// descent on the mean squared error.

#include <cstdint>
#include <vector>

#include "qru/harmonic.hpp"
#include "qru/model.hpp"
#include "qru/sampling.hpp"

namespace qru {

struct TrainOptions {
  double learning_rate = 0.05;
  int iterations = 2000;
  /// Abort once the loss stays above factor * initial loss for this many
  /// consecutive iterations.
  double divergence_factor = 10.0;
  int divergence_patience = 50;
};

struct TrainResult {
  RealVector theta;
  FrequencyProfile profile;
  /// Loss before each update, then the final loss.
  std::vector<double> loss;
  /// |a_k| for k = 0..max_k of the fitted function and of the target.
  RealVector fitted_abs;
  RealVector target_abs;
};

/// n points k * 2 pi / n on [0, 2 pi).
RealVector uniform_grid(int n);

/// sum_{|k| <= K} e^{ikx} / (2K + 1) at each x.
RealVector step_target(int K, const RealVector& xs);

/// |a_k| for k = 0..max_k of a real function sampled on uniform_grid(n).
RealVector grid_fourier_abs(const RealVector& values, int max_k);

/// Starts from a draw of `sampler` with `seed`. Throws DivergenceError when
/// the loss blows up. `max_k` sets the length of the |a_k| vectors.
TrainResult train(const QruModel& model, const ThetaSampler& sampler, const RealVector& target,
                  const TrainOptions& options, std::uint64_t seed, int max_k);

}  // namespace qru
