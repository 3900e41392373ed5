#include "qru/gradients.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qru/errors.hpp"
#include "qru/parallel.hpp"

namespace qru {

namespace {

constexpr int kMaxWitnessQubits = 5;
constexpr std::size_t kChunk = 64;

double unbiased_var(double s1, double s2, double n) { return (s2 - s1 * s1 / n) / (n - 1.0); }

struct BatchSums {
  double count = 0.0;
  RealMatrix s1, s2;        // per parameter, per column (data points then x = 0)
  RealVector bar1, bar2;    // E_x d_j h per theta draw
  double norm1 = 0.0, norm2 = 0.0;
};

struct ScanEstimates {
  RealVector mean_var, var_zero, var_of_mean;
};

ScanEstimates estimates(const BatchSums& b, Eigen::Index n_x) {
  const Eigen::Index m = b.s1.rows();
  ScanEstimates e{RealVector::Zero(m), RealVector::Zero(m), RealVector::Zero(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index c = 0; c < n_x; ++c) e.mean_var(j) += unbiased_var(b.s1(j, c), b.s2(j, c), b.count);
    e.mean_var(j) /= static_cast<double>(n_x);
    e.var_zero(j) = unbiased_var(b.s1(j, n_x), b.s2(j, n_x), b.count);
    e.var_of_mean(j) = unbiased_var(b.bar1(j), b.bar2(j), b.count);
  }
  return e;
}

RealVector batch_se(const std::vector<RealVector>& per_batch) {
  const double nb = static_cast<double>(per_batch.size());
  RealVector mean = RealVector::Zero(per_batch.front().size());
  for (const auto& v : per_batch) mean += v;
  mean /= nb;
  RealVector ss = RealVector::Zero(mean.size());
  for (const auto& v : per_batch) ss += (v - mean).array().square().matrix();
  return (ss / (nb - 1.0) / nb).array().sqrt().matrix();
}

ComplexVector kron_vec(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

double hermitian_trace_norm(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_norm(const ComplexMatrix& m) {
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

void check_witness_size(int n_qubits) {
  if (n_qubits > kMaxWitnessQubits) {
    throw CapacityError("gradients", "t = 2 witnesses are limited to " + std::to_string(kMaxWitnessQubits) +
                                         " qubits (4^n operators)");
  }
}

// Per-x result of one witness evaluation.
struct PointWitness {
  double value = 0.0, bias = 0.0, half_bias = 0.0;
};

// value, Frobenius bias bound and half-split bias from the two half-sample
// sums of the difference operator.
PointWitness finish_point(const ComplexMatrix& acc1, double n1, const ComplexMatrix& acc2, double n2,
                          double sum_frob_sq, double rank, bool hermitian) {
  const double n = n1 + n2;
  const ComplexMatrix mean = (acc1 + acc2) / n;
  auto norm1 = [&](const ComplexMatrix& a) { return hermitian ? hermitian_trace_norm(a) : trace_norm(a); };
  PointWitness w;
  w.value = norm1(mean);
  const double var = (sum_frob_sq / n - mean.squaredNorm()) * n / (n - 1.0);
  w.bias = std::sqrt(rank * std::max(0.0, var) / n);
  if (n1 > 0 && n2 > 0) {
    const double half = 0.5 * (norm1(acc1 / n1) + norm1(acc2 / n2));
    w.half_bias = std::max(0.0, (half - w.value) / (std::sqrt(2.0) - 1.0));
  }
  return w;
}

WitnessEstimate combine_points(const std::vector<PointWitness>& pts) {
  WitnessEstimate est;
  const double n = static_cast<double>(pts.size());
  double s1 = 0.0, s2 = 0.0;
  for (const auto& p : pts) {
    s1 += p.value;
    s2 += p.value * p.value;
    est.bias += p.bias / n;
    est.half_split_bias += p.half_bias / n;
  }
  est.value = s1 / n;
  est.se = pts.size() > 1 ? std::sqrt(std::max(0.0, unbiased_var(s1, s2, n)) / n) : 0.0;
  return est;
}

}  // namespace

VarianceScan variance_scan(const QruModel& model, const ThetaSampler& theta_sampler,
                           const DataSampler& data_sampler, std::size_t n_theta, std::size_t n_x,
                           std::uint64_t seed, const ScanOptions& options) {
  if (n_theta < 2) throw ValidationError("variance_scan needs n_theta >= 2");
  if (theta_sampler.size() != model.n_params()) {
    throw ArityError("theta sampler has " + std::to_string(theta_sampler.size()) + " parameters, model has " +
                     std::to_string(model.n_params()));
  }
  const CounterRng root(seed);
  CounterRng data_rng = root.split(0);
  const RealVector xs = data_sampler.draw(n_x, data_rng);
  if (xs.size() == 0) throw ValidationError("variance_scan needs at least one data point");
  const Eigen::Index nx = xs.size();
  RealVector cols(nx + 1);
  cols << xs, 0.0;
  const auto m = static_cast<Eigen::Index>(model.n_params());

  const std::size_t n_batches = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, options.batches)), 1,
                                                        n_theta / 2);
  std::vector<BatchSums> batches(n_batches);
  parallel_for(n_batches, options.threads, [&](std::size_t b) {
    BatchSums& sums = batches[b];
    sums.s1 = sums.s2 = RealMatrix::Zero(m, nx + 1);
    sums.bar1 = sums.bar2 = RealVector::Zero(m);
    const std::size_t lo = b * n_theta / n_batches, hi = (b + 1) * n_theta / n_batches;
    for (std::size_t s = lo; s < hi; ++s) {
      CounterRng rng = root.split(s + 1);
      const RealVector theta = theta_sampler.sample(rng);
      const RealMatrix g = batch_gradients(model, theta, cols);
      sums.s1 += g;
      sums.s2 += g.array().square().matrix();
      const RealVector bar = g.leftCols(nx).rowwise().mean();
      sums.bar1 += bar;
      sums.bar2 += bar.array().square().matrix();
      const double norm = g.leftCols(nx).colwise().norm().mean();
      sums.norm1 += norm;
      sums.norm2 += norm * norm;
      sums.count += 1.0;
    }
  });

  BatchSums total;
  total.s1 = total.s2 = RealMatrix::Zero(m, nx + 1);
  total.bar1 = total.bar2 = RealVector::Zero(m);
  for (const auto& b : batches) {
    total.count += b.count;
    total.s1 += b.s1;
    total.s2 += b.s2;
    total.bar1 += b.bar1;
    total.bar2 += b.bar2;
    total.norm1 += b.norm1;
    total.norm2 += b.norm2;
  }
  const ScanEstimates pooled = estimates(total, nx);

  VarianceScan scan;
  scan.n_theta = n_theta;
  scan.n_x = static_cast<std::size_t>(nx);
  scan.n_batches = n_batches;
  scan.xs = xs;
  scan.mean_var = pooled.mean_var;
  scan.var_at_zero = pooled.var_zero;
  scan.var_of_mean = pooled.var_of_mean;

  if (n_batches >= 2) {
    std::vector<RealVector> mv, vz, diff, jensen;
    for (const auto& b : batches) {
      const ScanEstimates e = estimates(b, nx);
      mv.push_back(e.mean_var);
      vz.push_back(e.var_zero);
      diff.push_back(e.mean_var - e.var_zero);
      jensen.push_back(e.mean_var - e.var_of_mean);
    }
    scan.mean_var_se = batch_se(mv);
    scan.var_at_zero_se = batch_se(vz);
    scan.diff_se = batch_se(diff);
    scan.jensen_se = batch_se(jensen);
  } else {
    // Too few draws to batch: normal-theory standard error of a variance.
    const double f = std::sqrt(2.0 / (total.count - 1.0));
    scan.mean_var_se = f * pooled.mean_var;
    scan.var_at_zero_se = f * pooled.var_zero;
    scan.diff_se = (scan.mean_var_se.array().square() + scan.var_at_zero_se.array().square()).sqrt().matrix();
    scan.jensen_se = (scan.mean_var_se.array().square() + (f * pooled.var_of_mean).array().square()).sqrt().matrix();
  }

  scan.mean_grad = total.s1.leftCols(nx) / total.count;
  scan.mean_grad_se = RealMatrix(m, nx);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index c = 0; c < nx; ++c) {
      scan.mean_grad_se(j, c) =
          std::sqrt(std::max(0.0, unbiased_var(total.s1(j, c), total.s2(j, c), total.count)) / total.count);
    }
  }
  scan.grad_norm_mean = total.norm1 / total.count;
  scan.grad_norm_se =
      std::sqrt(std::max(0.0, unbiased_var(total.norm1, total.norm2, total.count)) / total.count);
  return scan;
}

std::string side_name(WitnessSide side) {
  switch (side) {
    case WitnessSide::right: return "right";
    case WitnessSide::left: return "left";
    case WitnessSide::layerwise: return "layerwise";
  }
  return "unknown";
}

WitnessEstimate absorption_witness(const QruModel& model, std::size_t j, WitnessSide side,
                                   const ThetaSampler& theta_sampler,
                                   const DataSampler& data_sampler, std::size_t n_theta,
                                   std::size_t n_x, std::uint64_t seed, int threads) {
  if (side == WitnessSide::layerwise) throw ValidationError("use layerwise_witness for layer witnesses");
  if (j >= model.n_params()) throw OutOfRangeError("parameter index " + std::to_string(j) + " out of range");
  if (n_theta < 2) throw ValidationError("witness estimation needs n_theta >= 2");
  if (theta_sampler.size() != model.n_params()) throw ArityError("theta sampler arity does not match the model");
  check_witness_size(model.n_qubits());

  const std::size_t split = model.step_of_param(j);
  const auto& all = model.steps();
  std::vector<GateStep> part = side == WitnessSide::right
                                   ? std::vector<GateStep>(all.begin(), all.begin() + static_cast<long>(split))
                                   : std::vector<GateStep>(all.begin() + static_cast<long>(split), all.end());

  const CounterRng root(seed);
  CounterRng data_rng = root.split(0);
  const RealVector xs = data_sampler.draw(n_x, data_rng);

  WitnessEstimate est;
  const bool has_data = std::any_of(part.begin(), part.end(), [](const GateStep& s) { return s.is_encoding(); });
  if (has_data && xs.size() > 0) {
    const int d = model.dim();
    const int d2 = d * d;
    std::vector<PointWitness> pts(static_cast<std::size_t>(xs.size()));
    parallel_for(pts.size(), threads, [&](std::size_t c) {
      const double x = xs(static_cast<Eigen::Index>(c));
      CounterRng rng = root.split(c + 1);
      ComplexMatrix acc[2] = {ComplexMatrix::Zero(d2, d2), ComplexMatrix::Zero(d2, d2)};
      double count[2] = {0.0, 0.0};
      double frob = 0.0;
      if (side == WitnessSide::right) {
        ComplexMatrix a(d2, static_cast<Eigen::Index>(kChunk)), b(d2, static_cast<Eigen::Index>(kChunk));
        Eigen::Index filled = 0;
        int half = 0;
        auto flush = [&] {
          if (filled == 0) return;
          acc[half].noalias() += a.leftCols(filled) * a.leftCols(filled).adjoint();
          acc[half].noalias() -= b.leftCols(filled) * b.leftCols(filled).adjoint();
          filled = 0;
        };
        for (std::size_t s = 0; s < n_theta; ++s) {
          const int h = s < n_theta / 2 ? 0 : 1;
          if (h != half) {
            flush();
            half = h;
          }
          const RealVector theta = theta_sampler.sample(rng);
          ComplexVector psi_x = model.initial_state(), psi_0 = model.initial_state();
          for (const auto& step : part) {
            apply_step(step, theta, x, psi_x);
            apply_step(step, theta, 0.0, psi_0);
          }
          const double overlap = std::norm(psi_x.dot(psi_0));
          frob += 2.0 - 2.0 * overlap * overlap;
          a.col(filled) = kron_vec(psi_x, psi_x);
          b.col(filled) = kron_vec(psi_0, psi_0);
          count[half] += 1.0;
          if (++filled == static_cast<Eigen::Index>(kChunk)) flush();
        }
        flush();
        pts[c] = finish_point(acc[0], count[0], acc[1], count[1], frob, d * (d + 1) / 2.0, true);
      } else {
        const ComplexMatrix& h = model.observable().matrix();
        for (std::size_t s = 0; s < n_theta; ++s) {
          const int half = s < n_theta / 2 ? 0 : 1;
          const RealVector theta = theta_sampler.sample(rng);
          const ComplexMatrix ux = steps_unitary(part, d, theta, x);
          const ComplexMatrix u0 = steps_unitary(part, d, theta, 0.0);
          const ComplexMatrix hx = ux.adjoint() * h * ux;
          const ComplexMatrix h0 = u0.adjoint() * h * u0;
          const ComplexMatrix diff = kron(hx, hx) - kron(h0, h0);
          frob += diff.squaredNorm();
          acc[half] += diff;
          count[half] += 1.0;
        }
        pts[c] = finish_point(acc[0], count[0], acc[1], count[1], frob, static_cast<double>(d2), true);
      }
    });
    est = combine_points(pts);
  }
  est.side = side;
  est.index = j;
  est.n_theta = n_theta;
  est.n_x = static_cast<std::size_t>(xs.size());
  est.data = data_sampler.describe();
  return est;
}

WitnessEstimate layerwise_witness(const Layer& layer, int n_qubits, std::size_t layer_index,
                                  const ThetaSampler& theta_sampler,
                                  const DataSampler& data_sampler, std::size_t n_theta,
                                  std::size_t n_x, std::uint64_t seed, int threads) {
  if (n_theta < 2) throw ValidationError("witness estimation needs n_theta >= 2");
  check_witness_size(n_qubits);
  const int d = 1 << n_qubits;
  if (layer.encoding.dim() != d) throw InvalidDimensionError("layer encoding does not match the qubit count");
  for (const auto& step : layer.block) {
    if (step.is_encoding()) throw ValidationError("layer block must not contain encodings");
    if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
      if (p->param_index >= theta_sampler.size()) throw ArityError("theta sampler too short for the layer");
    }
  }
  const int d2 = d * d;
  const CounterRng root(seed);
  CounterRng data_rng = root.split(0);
  const RealVector xs = data_sampler.draw(n_x, data_rng);

  // E_theta[V^2 u^2 - u^2] = (V (x) V - I) E_theta[u (x) u]: the theta average
  // is shared by all data points.
  CounterRng rng = root.split(1);
  ComplexMatrix half_sum[2] = {ComplexMatrix::Zero(d2, d2), ComplexMatrix::Zero(d2, d2)};
  double count[2] = {0.0, 0.0};
  for (std::size_t s = 0; s < n_theta; ++s) {
    const int h = s < n_theta / 2 ? 0 : 1;
    const ComplexMatrix u = steps_unitary(layer.block, d, theta_sampler.sample(rng), 0.0);
    half_sum[h] += kron(u, u);
    count[h] += 1.0;
  }
  const double n = count[0] + count[1];
  const ComplexMatrix mean = (half_sum[0] + half_sum[1]) / n;
  // ||u (x) u||_F^2 = d^2 for unitary u.
  const double frob_var = std::max(0.0, (d2 - mean.squaredNorm()) * n / (n - 1.0));
  const double frob_se = std::sqrt(static_cast<double>(d2) * frob_var / n);

  std::vector<PointWitness> pts(static_cast<std::size_t>(xs.size()));
  parallel_for(pts.size(), threads, [&](std::size_t c) {
    const ComplexMatrix v = expm_i(layer.encoding, xs(static_cast<Eigen::Index>(c)));
    const ComplexMatrix shift = kron(v, v) - ComplexMatrix::Identity(d2, d2);
    const double shift_norm = schatten_norm(shift, SchattenOrder::spectral);
    PointWitness w;
    w.value = trace_norm(shift * mean);
    w.bias = shift_norm * frob_se;
    const double half = 0.5 * (trace_norm(shift * half_sum[0] / count[0]) + trace_norm(shift * half_sum[1] / count[1]));
    w.half_bias = std::max(0.0, (half - w.value) / (std::sqrt(2.0) - 1.0));
    pts[c] = w;
  });
  WitnessEstimate est = pts.empty() ? WitnessEstimate{} : combine_points(pts);
  est.side = WitnessSide::layerwise;
  est.index = layer_index;
  est.n_theta = n_theta;
  est.n_x = pts.size();
  est.data = data_sampler.describe();
  return est;
}

VarianceBoundReport check_variance_bound(const QruModel& model, const VarianceScan& scan,
                                         const WitnessEstimate& right, const WitnessEstimate& left,
                                         const std::vector<WitnessEstimate>& layer_witnesses,
                                         double n_sigma) {
  if (right.side != WitnessSide::right || left.side != WitnessSide::left) {
    throw ValidationError("check_variance_bound needs one right and one left witness");
  }
  if (right.index != left.index) throw ValidationError("right and left witnesses are for different gates");
  const std::size_t j = right.index;
  if (j >= model.n_params() || static_cast<Eigen::Index>(j) >= scan.mean_var.size()) {
    throw OutOfRangeError("gate index " + std::to_string(j) + " out of range");
  }
  const auto& step = model.steps()[model.step_of_param(j)];
  const double v = std::get<ParameterizedGate>(step.kind).generator.max_abs_eigenvalue();
  const double h = model.observable().max_abs_eigenvalue();
  // Pure initial state.
  const double rho = 1.0;
  const auto idx = static_cast<Eigen::Index>(j);

  VarianceBoundReport r;
  r.index = j;
  r.lhs = std::abs(scan.mean_var(idx) - scan.var_at_zero(idx));
  const double scale = 4.0 * v * v;
  r.rhs = scale * (h * h * right.value + rho * rho * left.value);
  const double rhs_se = scale * std::hypot(h * h * right.se, rho * rho * left.se);
  r.tolerance = n_sigma * std::hypot(scan.diff_se(idx), rhs_se);
  r.pass = r.lhs <= r.rhs + r.tolerance;
  if (!layer_witnesses.empty()) {
    double a = 0.0;
    for (const auto& w : layer_witnesses) {
      if (w.side != WitnessSide::layerwise) throw ValidationError("expected layerwise witnesses");
      a = std::max(a, w.value);
    }
    r.layered_rhs = 8.0 * static_cast<double>(layer_witnesses.size()) * v * v * h * h * rho * rho * a;
  }
  return r;
}

double information_entropy(const RealVector& increments, double eps) {
  const Eigen::Index n = increments.size();
  if (n < 2) return 0.0;
  auto symbol = [&](Eigen::Index t) {
    const double d = increments(t);
    return std::abs(d) <= eps ? 1 : (d > 0 ? 2 : 0);
  };
  std::array<double, 9> counts{};
  int prev = symbol(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    const int cur = symbol(t);
    counts[static_cast<std::size_t>(3 * prev + cur)] += 1.0;
    prev = cur;
  }
  const double total = static_cast<double>(n - 1);
  double entropy = 0.0;
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      if (p == q) continue;
      const double prob = counts[static_cast<std::size_t>(3 * p + q)] / total;
      if (prob > 0.0) entropy -= prob * std::log(prob) / std::log(6.0);
    }
  }
  return entropy;
}

InformationContent information_content(const QruModel& model, const ThetaSampler& theta_sampler,
                                       double x, const RandomWalk& walk, const RealVector& eps_grid,
                                       std::uint64_t seed) {
  if (walk.n_steps < 100) throw ValidationError("information_content needs at least 100 walk steps");
  if (!(walk.step_size > 0.0)) throw ValidationError("walk step size must be positive");
  if (theta_sampler.size() != model.n_params()) throw ArityError("theta sampler arity does not match the model");
  const auto m = static_cast<Eigen::Index>(model.n_params());
  InformationContent ic;
  if (m == 0) {
    ic.eps = eps_grid;
    ic.entropy = RealVector::Zero(eps_grid.size());
    return ic;
  }
  CounterRng rng(seed);
  RealVector theta = theta_sampler.sample(rng);
  const double step_norm = walk.step_size * std::sqrt(static_cast<double>(m));
  RealVector inc(static_cast<Eigen::Index>(walk.n_steps));
  double h = hypothesis(model, theta, x);
  for (std::size_t t = 0; t < walk.n_steps; ++t) {
    if (walk.independent && t > 0) {
      theta = theta_sampler.sample(rng);
      h = hypothesis(model, theta, x);
    }
    for (Eigen::Index i = 0; i < m; ++i) theta(i) += (rng() >> 63) ? walk.step_size : -walk.step_size;
    const double next = hypothesis(model, theta, x);
    const double diff = next - h;
    // Rounding noise of a flat landscape is not a slope.
    inc(static_cast<Eigen::Index>(t)) = std::abs(diff) < 1e-12 ? 0.0 : diff / step_norm;
    h = next;
  }
  const double top = inc.cwiseAbs().maxCoeff();
  if (eps_grid.size() > 0) {
    ic.eps = eps_grid;
  } else if (top > 0.0) {
    const int n = 200;
    ic.eps.resize(n);
    for (int i = 0; i < n; ++i) ic.eps(i) = top * std::pow(10.0, -4.0 + 4.0 * i / (n - 1));
  }
  ic.entropy = RealVector::Zero(ic.eps.size());
  if (top == 0.0) return ic;
  Eigen::Index best = 0;
  for (Eigen::Index i = 0; i < ic.eps.size(); ++i) {
    ic.entropy(i) = information_entropy(inc, ic.eps(i));
    if (ic.entropy(i) > ic.entropy(best)) best = i;
  }
  if (ic.eps.size() > 0 && ic.entropy(best) > 0.0) {
    ic.eps_max = ic.eps(best);
    ic.grad_proxy = ic.eps_max * std::sqrt(static_cast<double>(m));
  }
  return ic;
}

}  // namespace qru
