#include "qru/training.hpp"

#include <cmath>
#include <cstdio>

#include "qru/errors.hpp"
#include "qru/rng.hpp"

namespace qru {

RealVector uniform_grid(int n) {
  if (n < 1) throw ValidationError("grid size must be positive");
  RealVector xs(n);
  for (int i = 0; i < n; ++i) xs(i) = 2.0 * M_PI * i / n;
  return xs;
}

RealVector step_target(int K, const RealVector& xs) {
  if (K < 1) throw ValidationError("K_target must be at least 1");
  RealVector y(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    double s = 1.0;
    for (int k = 1; k <= K; ++k) s += 2.0 * std::cos(k * xs(i));
    y(i) = s / (2.0 * K + 1.0);
  }
  return y;
}

RealVector grid_fourier_abs(const RealVector& values, int max_k) {
  const Eigen::Index n = values.size();
  RealVector out(max_k + 1);
  for (int k = 0; k <= max_k; ++k) {
    Complex a = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) a += values(j) * std::polar(1.0, -2.0 * M_PI * k * j / n);
    out(k) = std::abs(a) / static_cast<double>(n);
  }
  return out;
}

TrainResult train(const QruModel& model, const ThetaSampler& sampler, const RealVector& target,
                  const TrainOptions& options, std::uint64_t seed, int max_k) {
  if (!(options.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (options.iterations < 0) throw ValidationError("iterations must be non-negative");
  if (sampler.size() != model.n_params()) throw ArityError("theta sampler does not match the model");
  const int n = static_cast<int>(target.size());
  if (2 * max_k >= n) throw ValidationError("max_k must stay below half the grid size");
  const RealVector xs = uniform_grid(n);

  CounterRng rng(seed);
  TrainResult r;
  r.theta = sampler.sample(rng);
  double loss = 0.0;
  auto weights = [&](const RealVector& h) {
    const RealVector diff = h - target;
    loss = diff.squaredNorm() / n;
    return RealVector(2.0 * diff / n);
  };

  double initial = -1.0;
  int above = 0;
  for (int it = 0; it < options.iterations; ++it) {
    const BatchGradient g = weighted_batch_gradient(model, r.theta, xs, weights);
    if (it == 0) initial = loss;
    r.loss.push_back(loss);
    if (!std::isfinite(loss)) throw DivergenceError("loss became non-finite at iteration " + std::to_string(it));
    above = loss > options.divergence_factor * initial ? above + 1 : 0;
    if (above >= options.divergence_patience) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "loss diverged: %.6g > %.3g x initial %.6g for %d iterations (iteration %d); lower the learning rate",
                    loss, options.divergence_factor, initial, above, it);
      throw DivergenceError(buf);
    }
    r.theta -= options.learning_rate * g.gradient;
  }
  weighted_batch_gradient(model, r.theta, xs, weights);
  r.loss.push_back(loss);

  r.profile = measure_fourier(simulate_harmonic(model, r.theta), model.observable());
  r.fitted_abs.resize(max_k + 1);
  for (int k = 0; k <= max_k; ++k) r.fitted_abs(k) = std::abs(r.profile.coefficient({k}));
  r.target_abs = grid_fourier_abs(target, max_k);
  return r;
}

}  // namespace qru
