#pragma once

// Lipschitz constants of hypothesis functions: the Fourier upper bound
// Lambda, the grid-search optimum, the average bounds over random circuits
// and empirical deviation tables.

#include <optional>
#include <utility>
#include <vector>

#include "qru/harmonic.hpp"
#include "qru/spectrum.hpp"

namespace qru {

/// sum_w |mu . w| |a_w|
double lambda_bound(const FrequencyProfile& profile);

struct GridOptions {
  /// Search interval for non-harmonic profiles; defaults to [0, 2 pi / min mu].
  std::optional<std::pair<double, double>> interval;
  /// Non-harmonic profiles are sampled with this many times more points.
  int oversampling = 16;
};

/// max_x |h'(x)| over one period (harmonic) or the configured interval,
/// from a uniform grid refined by golden-section search around each local
/// maximum. Refuses grids with fewer than 4 * max_index points.
double numeric_lipschitz(const FrequencyProfile& profile, int grid_points,
                         const GridOptions& options = {});

struct AverageBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Harmonic: (sqrt(2L) mu sigma ||H||, (4/sqrt(pi)) sqrt(L) mu sigma ||H||).
/// Non-harmonic: sqrt(2 L min eig Sigma) ||mu||_2 ||H|| and
/// (4/sqrt(pi)) sqrt(L Tr Sigma) ||mu||_2 ||H||.
AverageBounds average_bounds(const SpectrumKernel& kernel, int L, double observable_norm);

struct LipschitzReport {
  double lambda_bound = 0.0;
  double numeric_lipschitz = 0.0;
  double theory_lower = 0.0;
  double theory_upper = 0.0;
  double observable_norm = 0.0;
};

LipschitzReport lipschitz_report(const FrequencyProfile& profile, const SpectrumKernel& kernel,
                                 int L, int grid_points);

struct DeviationRow {
  double t = 0.0;
  double empirical = 0.0;
  double coarse_bound = 0.0;
  double refined_bound = 0.0;
};

struct DeviationTable {
  /// sqrt(2L) mu sigma ||H||, the centre the deviations are measured from.
  double reference = 0.0;
  double sample_mean = 0.0;
  double sample_se = 0.0;
  std::vector<DeviationRow> rows;
};

/// Empirical P(Lambda - reference >= t) with the coarse and refined tail
/// bounds on a uniform t grid from 0 past the largest observed deviation.
/// Needs at least 100 samples.
DeviationTable deviation_cdf(const RealVector& samples, const SpectrumKernel& kernel, int L,
                             double observable_norm, int n_points = 64);

}  // namespace qru
