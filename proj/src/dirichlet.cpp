#include "qru/dirichlet.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "qru/errors.hpp"

namespace qru {

DirichletParams::DirichletParams(RealVector alpha, std::vector<LatticePoint> points)
    : alpha_(std::move(alpha)), points_(std::move(points)) {
  if (alpha_.size() == 0) throw InvalidDimensionError("Dirichlet needs at least one coordinate");
  if (!(alpha_.array() > 0.0).all() || !alpha_.allFinite()) {
    throw ValidationError("Dirichlet parameters must be positive and finite");
  }
  if (!points_.empty() && static_cast<Eigen::Index>(points_.size()) != alpha_.size()) {
    throw InvalidDimensionError("one lattice point per Dirichlet coordinate");
  }
  alpha_sum_ = alpha_.sum();
}

double DirichletParams::mean(int i) const { return alpha_(i) / alpha_sum_; }

double DirichletParams::variance(int i) const {
  const double a = alpha_(i), s = alpha_sum_;
  return a * (s - a) / (s * s * (s + 1.0));
}

double DirichletParams::covariance(int i, int j) const {
  if (i == j) return variance(i);
  const double s = alpha_sum_;
  return -alpha_(i) * alpha_(j) / (s * s * (s + 1.0));
}

DirichletParams DirichletParams::aggregate(int i, int j) const {
  if (i == j) throw ValidationError("aggregate needs two distinct coordinates");
  RealVector merged(alpha_.size() - 1);
  Eigen::Index out = 0;
  for (int c = 0; c < alpha_.size(); ++c) {
    if (c == j) continue;
    merged(out++) = c == i ? alpha_(i) + alpha_(j) : alpha_(c);
  }
  return DirichletParams(merged);
}

DirichletParams params_from_kernel(const SpectrumKernel& k) {
  RealVector alpha(static_cast<Eigen::Index>(k.size()));
  std::vector<LatticePoint> points;
  Eigen::Index i = 0;
  for (const auto& [p, w] : k.weights()) {
    alpha(i++) = static_cast<double>(k.source_dim()) * w;
    points.push_back(p);
  }
  return DirichletParams(alpha, std::move(points));
}

DirichletParams params_from_kernel(const SpectrumKernel& k, int n_qubits) {
  return params_from_kernel(SpectrumKernel(k.mu(), k.weights(), 1 << n_qubits));
}

RealVector dirichlet_sample(const DirichletParams& p, CounterRng& rng) {
  // Gamma draws in log space; G(a) = G(a + 1) U^{1/a} keeps tiny shapes from
  // underflowing to zero before normalization.
  const int n = p.size();
  RealVector log_g(n);
  for (int i = 0; i < n; ++i) {
    const double a = p.alpha()(i);
    if (a >= 1.0) {
      std::gamma_distribution<double> gamma(a, 1.0);
      log_g(i) = std::log(gamma(rng));
    } else {
      std::gamma_distribution<double> gamma(a + 1.0, 1.0);
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      log_g(i) = std::log(gamma(rng)) + std::log(u) / a;
    }
  }
  const double top = log_g.maxCoeff();
  RealVector x = (log_g.array() - top).exp();
  return x / x.sum();
}

RealVector dirichlet_sample(const DirichletParams& p, std::uint64_t seed) {
  CounterRng rng(seed);
  return dirichlet_sample(p, rng);
}

double dirichlet_moment(const DirichletParams& p, const std::vector<int>& k) {
  if (static_cast<int>(k.size()) != p.size()) throw ArityError("moment order vector length mismatch");
  double log_m = 0.0;
  int total = 0;
  for (int i = 0; i < p.size(); ++i) {
    if (k[static_cast<std::size_t>(i)] < 0) throw ValidationError("moment orders must be nonnegative");
    const double a = p.alpha()(i);
    log_m += std::lgamma(a + k[static_cast<std::size_t>(i)]) - std::lgamma(a);
    total += k[static_cast<std::size_t>(i)];
  }
  log_m += std::lgamma(p.alpha_sum()) - std::lgamma(p.alpha_sum() + total);
  return std::exp(log_m);
}

double expected_abs_coeff_bound(double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  return std::min(alpha / (alpha + 0.5), 2.0 * alpha);
}

double x_m(double alpha, double eps) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  // ((2^-a - eps)^(-1/a) - 1)^-1 with log(2^-a - eps) = -a log 2 + log1p(-eps 2^a).
  const double scaled = eps * std::exp2(alpha);
  if (scaled >= 1.0) return 1.0;
  const double u = std::log(2.0) - std::log1p(-scaled) / alpha;
  const double denom = std::expm1(u);
  if (!std::isfinite(denom)) return 0.0;
  return std::min(1.0, 1.0 / denom);
}

double tail_denominator(const SpectrumKernel& kernel, int L, TailMode mode,
                        double observable_norm, double eps) {
  if (L < 1) throw OutOfRangeError("tail bound needs L >= 1");
  if (kernel.dims() != 1) throw InvalidDimensionError("tail bound is defined for harmonic kernels");
  const double mu = kernel.mu()(0);
  const auto diff = power_convolve(convolve(kernel, kernel.reflected()), L);
  const double scale = 2.0 * std::pow(mu * observable_norm, 2);
  double sum = 0.0;
  if (mode == TailMode::coarse) {
    const int n_max = diff.support_bounds()[0];
    for (int n = 1; n <= n_max; ++n) sum += static_cast<double>(n) * n;
    return scale * sum;
  }
  const auto params = params_from_kernel(diff);
  for (int i = 0; i < params.size(); ++i) {
    const int n = params.points()[static_cast<std::size_t>(i)][0];
    if (n <= 0) continue;
    sum += static_cast<double>(n) * n * x_m(params.alpha()(i), eps);
  }
  return scale * sum;
}

double tail_bound(double t, const SpectrumKernel& kernel, int L, TailMode mode,
                  double observable_norm, double eps) {
  if (t < 0.0) throw ValidationError("tail bound needs t >= 0");
  const double denom = tail_denominator(kernel, L, mode, observable_norm, eps);
  if (denom <= 0.0) return t > 0.0 ? 0.0 : 0.5;
  return 0.5 * std::exp(-t * t / denom);
}

}  // namespace qru
