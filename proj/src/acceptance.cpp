#include "qru/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>

#include "qru/ansatz.hpp"
#include "qru/dirichlet.hpp"
#include "qru/errors.hpp"
#include "qru/gradients.hpp"
#include "qru/harmonic.hpp"
#include "qru/lipschitz.hpp"
#include "qru/parallel.hpp"
#include "qru/runner.hpp"
#include "qru/spectrum.hpp"
#include "qru/training.hpp"

namespace qru {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

RealVector finite_difference(const QruModel& m, const RealVector& theta, double x, double step) {
  RealVector g(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    RealVector tp = theta, tm = theta;
    tp(j) += step;
    tm(j) -= step;
    g(j) = (hypothesis(m, tp, x) - hypothesis(m, tm, x)) / (2 * step);
  }
  return g;
}

CriterionResult harmonic_equivalence(const AcceptanceOptions& o) {
  CriterionResult r;
  CounterRng rng(o.seed);
  const int n_models = 50, n_x = 20;
  std::vector<double> worst(n_models, 0.0);
  std::vector<std::string> shape(n_models);
  parallel_for(n_models, o.threads, [&](std::size_t i) {
    CounterRng local = rng.split(i);
    const QruModel m = random_model(local);
    const RealVector theta = ThetaSampler(m.n_params()).sample(local);
    const auto p = measure_fourier(simulate_harmonic(m, theta), m.observable());
    for (int s = 0; s < n_x; ++s) {
      const double x = 10 * local.uniform() - 5;
      worst[i] = std::max(worst[i], std::abs(p.value(x) - hypothesis(m, theta, x)));
    }
    shape[i] = fmt("n=%d encodings=%zu params=%zu", m.n_qubits(), m.n_encodings(), m.n_params());
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  for (int i = 0; i < n_models; ++i) r.details.push_back(fmt("model %2d %s max|diff|=%.3g", i, shape[i].c_str(), worst[i]));
  r.pass = w <= 1e-9;
  r.summary = fmt("50 models x 20 x: max |h_harmonic - h_statevector| = %.3g (tol 1e-9)", w);
  return r;
}

CriterionResult binomial_geometric(const AcceptanceOptions&) {
  CriterionResult r;
  const SpectrumKernel coin(RealVector::Ones(1), {{{0}, 0.5}, {{1}, 0.5}}, 2);
  double wb = 0.0;
  for (int L = 1; L <= 20; ++L) {
    const auto k = power_convolve(coin, L);
    double w = k.size() == static_cast<std::size_t>(L + 1) ? 0.0 : 1.0;
    for (int j = 0; j <= L; ++j) w = std::max(w, std::abs(k.weight({j}) - binomial(L, j) / std::ldexp(1.0, L)));
    r.details.push_back(fmt("binomial L=%2d max err %.3g", L, w));
    wb = std::max(wb, w);
  }
  double wg = 0.0;
  SpectrumKernel acc = SpectrumKernel::delta(RealVector::Ones(1));
  for (int L = 1; L <= 10; ++L) {
    // Encoding generator 2^{L-1} (Z + 1)/2 has eigenvalues {0, 2^{L-1}}.
    const double s = std::ldexp(1.0, L - 1);
    acc = convolve(acc, extract_kernel(build_generator(GeneratorSpec::pauli_string("Z0").scaled(0.5 * s, 0.5 * s), 1),
                                       RealVector::Ones(1)));
    double w = acc.size() == static_cast<std::size_t>(1 << L) ? 0.0 : 1.0;
    for (int j = 0; j < (1 << L); ++j) w = std::max(w, std::abs(acc.weight({j}) - std::ldexp(1.0, -L)));
    r.details.push_back(fmt("geometric L=%2d max err %.3g", L, w));
    wg = std::max(wg, w);
  }
  r.pass = wb <= 1e-12 && wg <= 1e-12;
  r.summary = fmt("binomial L<=20 max err %.3g, geometric L<=10 max err %.3g (tol 1e-12)", wb, wg);
  return r;
}

CriterionResult variance_additivity(const AcceptanceOptions& o) {
  CriterionResult r;
  CounterRng rng(o.seed);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::map<LatticePoint, double> w;
    const int size = 2 + static_cast<int>(rng.uniform() * 5);
    for (int i = 0; i < size; ++i) w[{static_cast<int>(rng.uniform() * 9) - 4}] += 0.05 + rng.uniform();
    double total = 0;
    for (auto& [k, v] : w) total += v;
    for (auto& [k, v] : w) v /= total;
    const SpectrumKernel k(RealVector::Ones(1), w, 4);
    const int L = 2 + static_cast<int>(rng.uniform() * 19);
    const double v1 = kernel_moments(k).covariance(0, 0);
    const double vl = kernel_moments(power_convolve(k, L)).covariance(0, 0);
    const double err = std::abs(vl - L * v1);
    worst = std::max(worst, err);
    r.details.push_back(fmt("kernel %d support %zu L=%2d var=%.6f L*var1=%.6f err %.3g", trial, k.size(), L, vl,
                            L * v1, err));
  }
  r.pass = worst <= 1e-12;
  r.summary = fmt("10 random kernels: max |var(k^*L) - L var(k)| = %.3g (tol 1e-12)", worst);
  return r;
}

CriterionResult haar_frequency_statistics(const AcceptanceOptions& o) {
  CriterionResult r;
  const int n = 3, L = 8, N = 500;
  const auto g = build_generator(half_collective_x(), n);
  const auto h = build_generator(GeneratorSpec::pauli_string("Z0"), n);
  const auto K = power_convolve(extract_kernel(g), L);
  const auto dp = params_from_kernel(K, n);
  const CounterRng root(o.seed);
  std::vector<std::map<LatticePoint, double>> weights(N);
  parallel_for(N, o.threads, [&](std::size_t i) {
    CounterRng rng = root.split(i);
    weights[i] = frequency_weights(simulate_harmonic(haar_interleaved(n, L, g, h, rng), RealVector(0)));
  });
  int mean_ok = 0, var_ok = 0, total = 0;
  double lo_ratio = 1e300, hi_ratio = 0.0;
  for (int i = 0; i < dp.size(); ++i) {
    const LatticePoint& k = dp.points()[static_cast<std::size_t>(i)];
    double s = 0, s2 = 0;
    for (const auto& w : weights) {
      const auto it = w.find(k);
      const double x = it == w.end() ? 0.0 : it->second;
      s += x;
      s2 += x * x;
    }
    const double mean = s / N;
    const double var = (s2 / N - mean * mean) * N / (N - 1.0);
    const double se = std::sqrt(var / N);
    const bool m_ok = std::abs(mean - K.weight(k)) <= 3 * se;
    const double ratio = var / dp.variance(i);
    const bool v_ok = ratio >= 0.5 && ratio <= 2.0;
    lo_ratio = std::min(lo_ratio, ratio);
    hi_ratio = std::max(hi_ratio, ratio);
    mean_ok += m_ok;
    var_ok += v_ok;
    ++total;
    r.details.push_back(fmt("k=%3d kernel %.5f mean %.5f se %.5f %s | var %.3g dirichlet %.3g ratio %.3f %s", k[0],
                            K.weight(k), mean, se, m_ok ? "ok" : "MISS", var, dp.variance(i), ratio,
                            v_ok ? "ok" : "MISS"));
  }
  const bool means = mean_ok >= 0.95 * total;
  const bool vars = var_ok == total;
  r.pass = means && vars;
  r.summary = fmt("means within 3 SE at %d/%d points (need 95%%); variance within factor 2 of Dirichlet(N_eff=8) at "
                  "%d/%d points, ratio range [%.2g, %.3g]",
                  mean_ok, total, var_ok, total, lo_ratio, hi_ratio);
  return r;
}

CriterionResult variance_scaling_slopes(const AcceptanceOptions& o) {
  CriterionResult r;
  bool pass = true;
  std::string parts;
  for (const AnsatzFamily fam : {AnsatzFamily::haar, AnsatzFamily::permutation_b}) {
    ExperimentConfig c;
    c.kind = ExperimentKind::variance_scaling;
    c.seed = o.seed;
    c.threads = o.threads;
    c.model.family = fam;
    c.n_qubits = {2, 3, 4};
    c.layers.clear();
    for (int L = 5; L <= 20; ++L) c.layers.push_back(L);
    c.sampling.n_theta = 200;
    c.sampling.batches = 10;
    const auto out = run_experiment(c);
    for (const auto& fit : out.summary["fits"]) {
      const int n = fit["n_qubits"].get<int>();
      const double slope = fit["slope"].get<double>();
      const double want = fam == AnsatzFamily::haar ? n / 4.0 : n * (n + 2) / 12.0;
      const double tol = fam == AnsatzFamily::haar ? 0.10 : 0.15;
      const double rel = std::abs(slope - want) / want;
      const bool ok = rel <= tol;
      pass = pass && ok;
      const char* model = fam == AnsatzFamily::haar ? "C" : "B";
      r.details.push_back(fmt("model %s n=%d slope %.4f +- %.4f expected %.4f rel err %.3f (tol %.2f) %s", model, n,
                              slope, fit["slope_se"].get<double>(), want, rel, tol, ok ? "ok" : "MISS"));
      parts += fmt("%s%s n=%d %.3f/%.3f", parts.empty() ? "" : ", ", model, n, slope, want);
    }
  }
  r.pass = pass;
  r.summary = "slope/expected: " + parts;
  return r;
}

// 200 Haar-interleaved samples of Lambda (n = 3, g = sum X / 2, H = Z0). The
// same seed gives the same sample set for the bracket and tail criteria.
RealVector haar_lambdas(int L, std::uint64_t seed, int threads) {
  const int n = 3, N = 200;
  const auto g = build_generator(half_collective_x(), n);
  const auto h = build_generator(GeneratorSpec::pauli_string("Z0"), n);
  const CounterRng root = CounterRng(seed).split(static_cast<std::uint64_t>(L));
  RealVector out(N);
  parallel_for(N, threads, [&](std::size_t i) {
    CounterRng rng = root.split(i);
    const auto m = haar_interleaved(n, L, g, h, rng);
    out(static_cast<Eigen::Index>(i)) = lambda_bound(measure_fourier(simulate_harmonic(m, RealVector(0)), h));
  });
  return out;
}

SpectrumKernel haar_kernel() { return extract_kernel(build_generator(half_collective_x(), 3)); }

CriterionResult lipschitz_bracket(const AcceptanceOptions& o) {
  CriterionResult r;
  const auto k = haar_kernel();
  bool pass = true;
  double worst_ratio_err = 0.0;
  std::string parts;
  for (int L : {4, 8, 16}) {
    const RealVector s = haar_lambdas(L, o.seed, o.threads);
    const double mean = s.mean();
    const double se = std::sqrt((s.array() - mean).square().sum() / (s.size() - 1.0) / s.size());
    const auto b = average_bounds(k, L, 1.0);
    const bool ok = mean >= b.lower - 2 * se && mean <= b.upper + 2 * se;
    worst_ratio_err = std::max(worst_ratio_err, std::abs(b.upper / b.lower - 2 * std::sqrt(2.0) / std::sqrt(M_PI)));
    pass = pass && ok;
    r.details.push_back(fmt("L=%2d mean Lambda %.4f +- %.4f bracket [%.4f, %.4f] %s (%.2f SE above upper)", L, mean, se,
                            b.lower, b.upper, ok ? "ok" : "MISS", (mean - b.upper) / se));
    parts += fmt("%sL=%d %.3f in [%.3f, %.3f]%s", parts.empty() ? "" : ", ", L, mean, b.lower, b.upper, ok ? "" : " NO");
  }
  const bool ratio_ok = worst_ratio_err <= 1e-12;
  r.details.push_back(fmt("upper/lower - 2 sqrt2 / sqrt pi = %.3g", worst_ratio_err));
  r.pass = pass && ratio_ok;
  r.summary = parts + fmt("; bound ratio error %.2g", worst_ratio_err);
  return r;
}

CriterionResult lipschitz_tail(const AcceptanceOptions& o) {
  CriterionResult r;
  const auto k = haar_kernel();
  bool pass = true;
  double worst_margin = 1.0;
  for (int L : {4, 8, 16}) {
    const RealVector s = haar_lambdas(L, o.seed, o.threads);
    const auto t = deviation_cdf(s, k, L, 1.0, 64);
    const double start = std::max(0.0, t.sample_mean - t.reference);
    int checked = 0, bad = 0;
    for (const auto& row : t.rows) {
      if (row.t < start) continue;
      ++checked;
      worst_margin = std::min(worst_margin, row.refined_bound - row.empirical);
      if (row.empirical > row.refined_bound) ++bad;
    }
    pass = pass && bad == 0 && checked > 0;
    r.details.push_back(fmt("L=%2d reference %.4f mean %.4f: %d t values past the mean, %d above the refined tail", L,
                            t.reference, t.sample_mean, checked, bad));
  }
  r.pass = pass;
  r.summary = fmt("L in {4, 8, 16}: smallest margin (refined tail - empirical CCDF) past the mean = %.4f", worst_margin);
  return r;
}

CriterionResult variance_bound_audit(const AcceptanceOptions& o) {
  CriterionResult r;
  const auto z0 = GeneratorSpec::pauli_string("Z0");
  ModelBuilder shared(2);
  shared.param(GeneratorSpec::collective('Y'))
      .param(GeneratorSpec::cyclic_zz())
      .encode(GeneratorSpec::cyclic_zz())
      .param(GeneratorSpec::collective('X'))
      .observable(z0);
  ModelBuilder design(2);
  design.param(GeneratorSpec::pauli_string("Y1"));
  const std::size_t polar_a = add_euler_block(design, 0);
  design.encode(GeneratorSpec::pauli_string("X0"));
  const std::size_t polar_b = add_euler_block(design, 0);
  design.fixed(cnot_matrix(0, 1, 2), "cnot").param(GeneratorSpec::pauli_string("X1")).observable(
      GeneratorSpec::pauli_string("Z1"));
  ModelBuilder mixed(2);
  mixed.param(GeneratorSpec::collective('Y'))
      .encode(GeneratorSpec::collective('X'))
      .param(GeneratorSpec::cyclic_zz())
      .encode(GeneratorSpec::collective('X'))
      .param(GeneratorSpec::collective('Y'))
      .observable(z0);
  const std::vector<std::pair<std::string, QruModel>> models = {
      {"shared-generator", shared.build()}, {"2-design-absorbable", design.build()}, {"non-absorbable", mixed.build()}};
  const DataSampler data = DataSampler::uniform(-M_PI, M_PI);
  const std::size_t n_theta = 10000, n_x = 20;
  bool pass = true;
  int checks = 0, failures = 0;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto& [name, m] = models[mi];
    // Euler polar angles are drawn so that each block is Haar on SU(2).
    std::vector<ThetaKind> kinds(m.n_params(), ThetaKind::uniform);
    if (name == "2-design-absorbable") kinds[polar_a] = kinds[polar_b] = ThetaKind::haar_polar;
    const ThetaSampler ts(kinds);
    const CounterRng rng = CounterRng(o.seed).split(mi);
    ScanOptions opt;
    opt.threads = o.threads;
    const auto scan = variance_scan(m, ts, data, n_theta, n_x, rng.split(0)(), opt);
    for (std::size_t j = 0; j < m.n_params(); ++j) {
      const auto right = absorption_witness(m, j, WitnessSide::right, ts, data, n_theta, n_x, rng.split(1 + 2 * j)(),
                                            o.threads);
      const auto left = absorption_witness(m, j, WitnessSide::left, ts, data, n_theta, n_x, rng.split(2 + 2 * j)(),
                                           o.threads);
      const auto rep = check_variance_bound(m, scan, right, left);
      ++checks;
      bool ok = rep.pass;
      std::string extra;
      if (name == "shared-generator") {
        const bool absorbed = right.value <= right.bias && left.value <= left.bias;
        ok = ok && absorbed;
        extra = fmt(" witnesses %.4f<=%.4f, %.4f<=%.4f %s", right.value, right.bias, left.value, left.bias,
                    absorbed ? "ok" : "MISS");
      }
      if (!ok) ++failures;
      pass = pass && ok;
      r.details.push_back(fmt("%s j=%zu lhs %.4g rhs %.4g tol %.3g %s%s", name.c_str(), j, rep.lhs, rep.rhs,
                              rep.tolerance, rep.pass ? "ok" : "MISS", extra.c_str()));
    }
  }
  r.pass = pass;
  r.summary = fmt("3 two-qubit models, 10^4 theta x 20 x: %d/%d parameter checks hold", checks - failures, checks);
  return r;
}

CriterionResult gradient_correctness(const AcceptanceOptions& o) {
  CriterionResult r;
  CounterRng rng(o.seed);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const QruModel m = random_model(rng);
    const RealVector theta = ThetaSampler(m.n_params()).sample(rng);
    const double x = 4 * rng.uniform() - 2;
    if (m.n_params() == 0) continue;
    worst = std::max(worst, (gradient(m, theta, x) - finite_difference(m, theta, x, 1e-5)).cwiseAbs().maxCoeff());
  }
  r.details.push_back(fmt("100 random triples: max |commutator - central difference| = %.3g", worst));
  RandomModelOptions opts;
  opts.dense_param_generators = false;
  opts.max_qubits = 3;
  int checks = 0, outside = 0;
  double worst_z = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const QruModel m = random_model(rng, opts);
    if (m.n_params() == 0) continue;
    ScanOptions so;
    so.threads = o.threads;
    const auto scan = variance_scan(m, ThetaSampler(m.n_params()), DataSampler::uniform(-M_PI, M_PI), 2000, 4,
                                    rng(), so);
    for (Eigen::Index j = 0; j < scan.mean_grad.rows(); ++j) {
      for (Eigen::Index c = 0; c < scan.mean_grad.cols(); ++c) {
        ++checks;
        const double se = scan.mean_grad_se(j, c);
        const double z = se > 0 ? std::abs(scan.mean_grad(j, c)) / se : (scan.mean_grad(j, c) == 0 ? 0 : 1e9);
        worst_z = std::max(worst_z, z);
        if (z > 4 && std::abs(scan.mean_grad(j, c)) > 1e-12) ++outside;
      }
    }
  }
  r.details.push_back(fmt("zero mean: %d (parameter, x) cells, %d beyond 4 SE, largest |mean|/SE %.2f", checks, outside,
                          worst_z));
  r.pass = worst <= 1e-6 && outside == 0;
  r.summary = fmt("max gradient error %.3g (tol 1e-6); zero-mean: %d/%d cells within 4 SE", worst, checks - outside,
                  checks);
  return r;
}

CriterionResult dirichlet_machinery(const AcceptanceOptions& o) {
  CriterionResult r;
  RealVector alpha(5);
  alpha << 0.4, 1.5, 0.8, 2.3, 0.125;
  const DirichletParams p(alpha);
  const double a0 = alpha.sum();
  double exact = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    std::vector<int> e(5, 0);
    e[static_cast<std::size_t>(i)] = 1;
    const double ai = alpha(i);
    exact = std::max(exact, std::abs(dirichlet_moment(p, e) - ai / a0));
    exact = std::max(exact, std::abs(p.mean(i) - ai / a0));
    exact = std::max(exact, std::abs(p.variance(i) - ai * (a0 - ai) / (a0 * a0 * (a0 + 1))));
    e[static_cast<std::size_t>(i)] = 2;
    exact = std::max(exact, std::abs(dirichlet_moment(p, e) - ai * (ai + 1) / (a0 * (a0 + 1))));
    for (int j = i + 1; j < p.size(); ++j) {
      std::vector<int> f(5, 0);
      f[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(j)] = 1;
      exact = std::max(exact, std::abs(p.covariance(i, j) + ai * alpha(j) / (a0 * a0 * (a0 + 1))));
      exact = std::max(exact, std::abs(dirichlet_moment(p, f) - ai * alpha(j) / (a0 * (a0 + 1))));
    }
  }
  r.details.push_back(fmt("closed forms: max error %.3g", exact));

  const int N = 100000;
  CounterRng rng(o.seed);
  RealMatrix xs(N, 5);
  for (int s = 0; s < N; ++s) xs.row(s) = dirichlet_sample(p, rng).transpose();
  int checks = 0, misses = 0;
  auto check = [&](const std::string& what, double est, double want, double se) {
    ++checks;
    const bool ok = std::abs(est - want) <= 3 * se;
    misses += !ok;
    r.details.push_back(fmt("%-22s sample %.6f exact %.6f se %.2g %s", what.c_str(), est, want, se, ok ? "ok" : "MISS"));
  };
  const RealVector mean = xs.colwise().mean();
  for (int i = 0; i < 5; ++i) {
    std::vector<int> e2(5, 0), e3(5, 0), e4(5, 0);
    e2[static_cast<std::size_t>(i)] = 2;
    e3[static_cast<std::size_t>(i)] = 3;
    e4[static_cast<std::size_t>(i)] = 4;
    check(fmt("mean %d", i), mean(i), p.mean(i), std::sqrt(p.variance(i) / N));
    const RealVector c = xs.col(i).array() - mean(i);
    const double var = c.squaredNorm() / (N - 1.0);
    // Var of (x - m)^2 from the exact central fourth moment.
    const double m1 = p.mean(i), m2 = dirichlet_moment(p, e2), m3 = dirichlet_moment(p, e3), m4 = dirichlet_moment(p, e4);
    const double c4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1;
    check(fmt("variance %d", i), var, p.variance(i), std::sqrt((c4 - p.variance(i) * p.variance(i)) / N));
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const RealVector prod = (xs.col(i).array() - mean(i)) * (xs.col(j).array() - mean(j));
      const double cov = prod.sum() / (N - 1.0);
      const double se = std::sqrt((prod.array() - prod.mean()).square().sum() / (N - 1.0) / N);
      check(fmt("covariance %d,%d", i, j), cov, p.covariance(i, j), se);
    }
  }
  // Aggregation: x_1 + x_2 ~ Dir coordinate with alpha_1 + alpha_2.
  const auto merged = p.aggregate(1, 2);
  const RealVector agg = xs.col(1) + xs.col(2);
  int mi = -1;
  for (int i = 0; i < merged.size(); ++i) {
    if (std::abs(merged.alpha()(i) - (alpha(1) + alpha(2))) < 1e-15) mi = i;
  }
  if (mi < 0) {
    ++checks;
    ++misses;
    r.details.push_back("aggregate: merged coordinate not found");
  } else {
    const double am = agg.mean();
    const double av = (agg.array() - am).square().sum() / (N - 1.0);
    check("aggregate mean", am, merged.mean(mi), std::sqrt(merged.variance(mi) / N));
    std::vector<int> e2(static_cast<std::size_t>(merged.size()), 0), e4 = e2;
    e2[static_cast<std::size_t>(mi)] = 2;
    e4[static_cast<std::size_t>(mi)] = 4;
    const double m2 = dirichlet_moment(merged, e2), m4 = dirichlet_moment(merged, e4);
    check("aggregate second moment", (agg.array().square()).mean(), m2, std::sqrt((m4 - m2 * m2) / N));
    check("aggregate variance", av, merged.variance(mi), 2 * std::sqrt((m4 - m2 * m2) / N));
  }
  r.pass = exact <= 1e-14 && misses == 0;
  r.summary = fmt("closed forms max error %.2g; %d/%d sample moments within 3 SE (10^5 draws)", exact, checks - misses,
                  checks);
  return r;
}

CriterionResult nonharmonic_example(const AcceptanceOptions&) {
  CriterionResult r;
  const double r2 = std::sqrt(2.0);
  const std::vector<double> ev = {-(r2 + 1), -r2, -1, 0, 0, 1, r2, r2 + 1};
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  for (int i = 0; i < 8; ++i) m(i, i) = ev[static_cast<std::size_t>(i)];
  RealVector mu(2);
  mu << r2, 1.0;
  const auto k = extract_kernel(HermitianGenerator(m), mu);
  const double want[3][3] = {{1, 1, 0}, {1, 2, 1}, {0, 1, 1}};
  double kernel_err = k.size() == 7 ? 0.0 : 1.0;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) kernel_err = std::max(kernel_err, std::abs(k.weight({a, b}) - want[a + 1][b + 1] / 8));
  }
  r.details.push_back(fmt("kernel max error %.3g (support %zu)", kernel_err, k.size()));
  double cov_err = 0.0;
  for (int L : {1, 2, 3, 5, 10, 20}) {
    const auto cov = kernel_moments(power_convolve(k, L)).covariance;
    RealMatrix w(2, 2);
    w << 1, 0.5, 0.5, 1;
    w *= L / 2.0;
    const double e = (cov - w).cwiseAbs().maxCoeff();
    cov_err = std::max(cov_err, e);
    r.details.push_back(fmt("L=%2d covariance [[%.6f, %.6f], [%.6f, %.6f]] error %.3g", L, cov(0, 0), cov(0, 1),
                            cov(1, 0), cov(1, 1), e));
  }
  r.pass = kernel_err <= 1e-12 && cov_err <= 1e-12;
  r.summary = fmt("kernel max error %.2g, L-fold covariance max error %.2g (tol 1e-12)", kernel_err, cov_err);
  return r;
}

CriterionResult training_signature(const AcceptanceOptions& o) {
  CriterionResult r;
  AnsatzSpec spec;
  spec.family = AnsatzFamily::permutation_b;
  spec.n_qubits = 4;
  spec.layers = 30;
  CounterRng build(o.seed);
  const auto inst = build_ansatz(spec, build);
  const RealVector xs = uniform_grid(256);
  const int max_k = 60;
  TrainOptions opt;

  const auto small = train(inst.model, inst.sampler, step_target(4, xs), opt, o.seed + 1, max_k);
  double worst = 0.0;
  for (int k = 0; k <= 4; ++k) worst = std::max(worst, std::abs(small.fitted_abs(k) - small.target_abs(k)));
  const bool small_ok = worst <= 0.05;
  r.details.push_back(fmt("K_target=4: loss %.3g -> %.3g, max_{k<=4} | |a_k| - target | = %.4f %s", small.loss.front(),
                          small.loss.back(), worst, small_ok ? "ok" : "MISS"));
  for (int k = 0; k <= 8; ++k) {
    r.details.push_back(fmt("  k=%2d fitted %.4f target %.4f", k, small.fitted_abs(k), small.target_abs(k)));
  }

  const auto large = train(inst.model, inst.sampler, step_target(40, xs), opt, o.seed + 2, max_k);
  double worst_ratio = 0.0;
  int high = 0, bad = 0;
  for (int k = 26; k <= 40; ++k) {
    const double ratio = large.fitted_abs(k) / large.target_abs(k);
    worst_ratio = std::max(worst_ratio, ratio);
    ++high;
    bad += ratio >= 0.5;
  }
  const bool large_ok = bad == 0;
  r.details.push_back(fmt("K_target=40: loss %.3g -> %.3g, largest fitted/target over 25 < k <= 40 = %.3f %s",
                          large.loss.front(), large.loss.back(), worst_ratio, large_ok ? "ok" : "MISS"));
  for (int k = 0; k <= 44; k += 2) {
    r.details.push_back(fmt("  k=%2d fitted %.4f target %.4f", k, large.fitted_abs(k), large.target_abs(k)));
  }
  r.pass = small_ok && large_ok;
  r.summary = fmt("K=4 max |a_k| error %.4f (tol 0.05); K=40: %d/%d of k in 26..40 below half target (max ratio %.3f)",
                  worst, high - bad, high, worst_ratio);
  return r;
}

CriterionResult ic_proxy(const AcceptanceOptions& o) {
  CriterionResult r;
  CounterRng rng(o.seed);
  RandomModelOptions opts;
  opts.min_qubits = opts.max_qubits = 3;
  opts.dense_param_generators = false;
  const double x = 0.7;
  int ok_count = 0, models = 0;
  double lo = 1e300, hi = 0;
  while (models < 10) {
    const QruModel m = random_model(rng, opts);
    if (m.n_params() < 2) continue;
    const ThetaSampler ts(m.n_params());
    const std::size_t N = 2000;
    std::vector<double> norms(N);
    const CounterRng base = rng.split(1000 + static_cast<std::uint64_t>(models));
    parallel_for(N, o.threads, [&](std::size_t i) {
      CounterRng local = base.split(i);
      norms[i] = gradient(m, ts.sample(local), x).norm();
    });
    double direct = 0.0;
    for (double v : norms) direct += v;
    direct /= static_cast<double>(N);
    // A landscape that is flat in every parameter has no ratio to compare.
    if (direct < 1e-12) {
      r.details.push_back(fmt("redrawn: model with %zu params has a flat landscape at x = %.1f", m.n_params(), x));
      continue;
    }
    const auto ic = information_content(m, ts, x, RandomWalk{}, RealVector(), rng());
    const double ratio = ic.grad_proxy / direct;
    const bool ok = ratio >= 1.0 / 3.0 && ratio <= 3.0;
    ok_count += ok;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    r.details.push_back(fmt("model %d params %zu: proxy %.4f direct E||grad|| %.4f ratio %.3f %s", models, m.n_params(),
                            ic.grad_proxy, direct, ratio, ok ? "ok" : "MISS"));
    ++models;
  }
  r.pass = ok_count == models;
  r.summary = fmt("%d/%d models within factor 3, ratio range [%.3f, %.3f]", ok_count, models, lo, hi);
  return r;
}

using Runner = CriterionResult (*)(const AcceptanceOptions&);

struct Entry {
  CriterionInfo info;
  Runner run;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = {
      {{1, "harmonic-equivalence"}, harmonic_equivalence},
      {{2, "binomial-geometric-kernels"}, binomial_geometric},
      {{3, "variance-additivity"}, variance_additivity},
      {{4, "haar-frequency-statistics"}, haar_frequency_statistics},
      {{5, "variance-scaling"}, variance_scaling_slopes},
      {{6, "lipschitz-bracket"}, lipschitz_bracket},
      {{7, "lipschitz-tail"}, lipschitz_tail},
      {{8, "variance-bound-audit"}, variance_bound_audit},
      {{9, "gradient-correctness"}, gradient_correctness},
      {{10, "dirichlet-moments"}, dirichlet_machinery},
      {{11, "non-harmonic-kernel"}, nonharmonic_example},
      {{12, "training-signature"}, training_signature},
      {{13, "information-content-proxy"}, ic_proxy},
  };
  return e;
}

}  // namespace

const std::vector<CriterionInfo>& criteria() {
  static const std::vector<CriterionInfo> list = [] {
    std::vector<CriterionInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return list;
}

int find_criterion(const std::string& key) {
  for (const auto& e : entries()) {
    if (key == e.info.name || key == std::to_string(e.info.id)) return e.info.id;
  }
  return 0;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  for (const auto& e : entries()) {
    if (e.info.id != id) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = e.run(options);
    r.id = id;
    r.name = e.info.name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  throw ValidationError("unknown acceptance criterion " + std::to_string(id));
}

}  // namespace qru
