#include "qru/lipschitz.hpp"

#include <algorithm>
#include <cmath>

#include "qru/dirichlet.hpp"
#include "qru/errors.hpp"

namespace qru {

namespace {

// Golden-section maximisation of f on [a, b].
template <class F>
double golden_max(F&& f, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::max({fc, fd, f(0.5 * (a + b))});
}

}  // namespace

double lambda_bound(const FrequencyProfile& profile) {
  double sum = 0.0;
  for (const auto& [w, a] : profile.coefficients()) sum += std::abs(profile.frequency(w)) * std::abs(a);
  return sum;
}

double numeric_lipschitz(const FrequencyProfile& profile, int grid_points, const GridOptions& options) {
  const int need = 4 * profile.max_index();
  if (grid_points < std::max(need, 1)) {
    throw ValidationError("grid of " + std::to_string(grid_points) + " points is too coarse for frequency index " +
                          std::to_string(profile.max_index()) + "; use at least " + std::to_string(std::max(need, 1)) +
                          " points");
  }
  if (profile.coefficients().empty()) return 0.0;
  const RealVector& mu = profile.mu();
  const bool harmonic = mu.size() == 1;
  double lo = 0.0, hi = 2.0 * M_PI / mu.minCoeff();
  int points = grid_points;
  if (!harmonic) {
    if (options.interval) std::tie(lo, hi) = *options.interval;
    points = grid_points * std::max(1, options.oversampling);
  }
  if (!(hi > lo)) throw ValidationError("empty search interval");
  const double dx = (hi - lo) / points;
  auto f = [&](double x) { return std::abs(profile.derivative(x)); };
  // Harmonic grids are periodic, so the end point wraps to the start.
  const int n = harmonic ? points : points + 1;
  RealVector vals(n);
  for (int i = 0; i < n; ++i) vals(i) = f(lo + i * dx);
  double best = vals.maxCoeff();
  for (int i = 0; i < n; ++i) {
    const double left = harmonic ? vals((i - 1 + n) % n) : (i > 0 ? vals(i - 1) : -1.0);
    const double right = harmonic ? vals((i + 1) % n) : (i + 1 < n ? vals(i + 1) : -1.0);
    if (vals(i) >= left && vals(i) >= right) {
      const double x = lo + i * dx;
      double a = x - dx, b = x + dx;
      if (!harmonic) {
        a = std::max(a, lo);
        b = std::min(b, hi);
      }
      best = std::max(best, golden_max(f, a, b));
    }
  }
  return best;
}

AverageBounds average_bounds(const SpectrumKernel& kernel, int L, double observable_norm) {
  if (L < 1) throw OutOfRangeError("average_bounds needs L >= 1");
  const KernelMoments m = kernel_moments(kernel);
  const double sl = std::sqrt(static_cast<double>(L));
  const double mu_norm = kernel.mu().norm();
  AverageBounds b;
  if (kernel.dims() == 1) {
    const double sigma = std::sqrt(m.covariance(0, 0));
    b.lower = std::sqrt(2.0) * sl * mu_norm * sigma * observable_norm;
    b.upper = 4.0 / std::sqrt(M_PI) * sl * mu_norm * sigma * observable_norm;
  } else {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(m.covariance, Eigen::EigenvaluesOnly);
    const double min_eig = std::max(0.0, es.eigenvalues().minCoeff());
    b.lower = std::sqrt(2.0 * min_eig) * sl * mu_norm * observable_norm;
    b.upper = 4.0 / std::sqrt(M_PI) * std::sqrt(m.covariance.trace()) * sl * mu_norm * observable_norm;
  }
  return b;
}

LipschitzReport lipschitz_report(const FrequencyProfile& profile, const SpectrumKernel& kernel, int L,
                                 int grid_points) {
  LipschitzReport r;
  r.lambda_bound = lambda_bound(profile);
  r.numeric_lipschitz = numeric_lipschitz(profile, grid_points);
  const AverageBounds b = average_bounds(kernel, L, profile.observable_norm());
  r.theory_lower = b.lower;
  r.theory_upper = b.upper;
  r.observable_norm = profile.observable_norm();
  return r;
}

DeviationTable deviation_cdf(const RealVector& samples, const SpectrumKernel& kernel, int L,
                             double observable_norm, int n_points) {
  if (samples.size() < 100) throw ValidationError("deviation_cdf needs at least 100 samples");
  if (n_points < 2) throw ValidationError("deviation_cdf needs at least 2 grid points");
  DeviationTable table;
  table.reference = average_bounds(kernel, L, observable_norm).lower;
  const double n = static_cast<double>(samples.size());
  table.sample_mean = samples.mean();
  table.sample_se = std::sqrt((samples.array() - table.sample_mean).square().sum() / (n - 1.0) / n);
  const double top = samples.maxCoeff() - table.reference;
  // Identical samples still get a grid that shows the step.
  const double t_max = top > 0.0 ? 1.05 * top : std::max(1.0, 0.1 * table.reference);
  for (int i = 0; i < n_points; ++i) {
    DeviationRow row;
    row.t = t_max * i / (n_points - 1);
    row.empirical = ((samples.array() - table.reference) >= row.t).cast<double>().sum() / n;
    row.coarse_bound = tail_bound(row.t, kernel, L, TailMode::coarse, observable_norm);
    row.refined_bound = tail_bound(row.t, kernel, L, TailMode::refined, observable_norm);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace qru
