#include "qru/runner.hpp"

#include <openssl/sha.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "qru/dirichlet.hpp"
#include "qru/errors.hpp"
#include "qru/gradients.hpp"
#include "qru/harmonic.hpp"
#include "qru/lipschitz.hpp"
#include "qru/parallel.hpp"
#include "qru/spectrum.hpp"
#include "qru/training.hpp"

namespace qru {

namespace {

using nlohmann::ordered_json;

struct Point {
  int n_qubits, depth, layers;
  std::size_t index;
};

std::vector<Point> sweep(const ExperimentConfig& c) {
  std::vector<Point> points;
  const bool fixed_steps = !c.model.steps.empty();
  const std::vector<int> depths = fixed_steps ? std::vector<int>{1} : c.depth;
  const std::vector<int> layers = fixed_steps ? std::vector<int>{1} : c.layers;
  for (int n : c.n_qubits) {
    for (int d : depths) {
      for (int L : layers) points.push_back({n, d, L, points.size()});
    }
  }
  if (points.empty()) throw ValidationError("empty sweep");
  return points;
}

std::vector<Cell> point_cells(const Point& p) { return {Cell(p.n_qubits), Cell(p.depth), Cell(p.layers)}; }

ordered_json point_json(const Point& p) {
  return {{"n_qubits", p.n_qubits}, {"depth", p.depth}, {"L", p.layers}};
}

double mean_se(const std::vector<double>& v, double* se) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  *se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return m;
}

// Shared encoding generator of a model, restricted to the symmetric
// subspace for the permutation-invariant families.
SpectrumKernel encoding_kernel(const ExperimentConfig& c, const QruModel& m) {
  const HermitianGenerator* g = nullptr;
  for (const auto& s : m.steps()) {
    if (const auto* e = std::get_if<EncodingGate>(&s.kind)) {
      if (!g) g = &e->generator;
      else if (max_abs_entry(g->matrix() - e->generator.matrix()) > 1e-12) {
        throw ValidationError("spectral predictions need every encoding to use the same generator");
      }
    }
  }
  if (!g) throw ValidationError("model has no encoding steps");
  if (c.model.family == AnsatzFamily::permutation_a || c.model.family == AnsatzFamily::permutation_b) {
    return extract_kernel(restrict_generator(*g, symmetric_basis(m.n_qubits())));
  }
  return extract_kernel(*g);
}

int encoding_count(const QruModel& m) { return static_cast<int>(m.n_encodings()); }

// Draws one (model, theta) pair. Haar models are redrawn per sample.
struct Draw {
  const QruModel* model;
  RealVector theta;
  std::optional<QruModel> own;
};

class Sampler {
 public:
  Sampler(const ExperimentConfig& c, const Point& p, CounterRng base) : c_(c), p_(p), base_(base) {
    CounterRng r = base_.split(0);
    fixed_ = build_model(c.model, p.n_qubits, p.layers, p.depth, r);
    redraw_ = c.model.family == AnsatzFamily::haar || uses_haar_steps(c.model);
  }

  const ModelInstance& fixed() const { return *fixed_; }

  Draw draw(std::size_t i) const {
    CounterRng r = base_.split(1000 + i);
    Draw d{&fixed_->model, RealVector(), std::nullopt};
    if (redraw_) {
      auto inst = build_model(c_.model, p_.n_qubits, p_.layers, p_.depth, r);
      d.theta = inst.sampler.sample(r);
      d.own.emplace(std::move(inst.model));
      d.model = &*d.own;
    } else {
      d.theta = fixed_->sampler.sample(r);
    }
    return d;
  }

 private:
  static bool uses_haar_steps(const ModelConfig& m) {
    for (const auto* list : {&m.steps, &m.block}) {
      for (const auto& s : *list) {
        if (s.kind == StepConfig::Kind::haar) return true;
      }
    }
    return false;
  }

  const ExperimentConfig& c_;
  Point p_;
  CounterRng base_;
  std::optional<ModelInstance> fixed_;
  bool redraw_ = false;
};

void require_harmonic(const QruModel& m, const HarmonicState& hs) {
  if (hs.mu().size() != 1) {
    throw ValidationError("this experiment needs a harmonic encoding (one base frequency); model has " +
                          std::to_string(hs.mu().size()) + " (" + std::to_string(m.n_encodings()) + " encodings)");
  }
}

struct ProfileStats {
  double mu = 1.0;
  std::map<int, double> mean, se;
  double variance = 0.0, variance_se = 0.0;  // physical units
  std::size_t samples = 0;
};

double profile_variance(const std::map<int, double>& w, double mu) {
  double s = 0, m1 = 0, m2 = 0;
  for (const auto& [k, v] : w) {
    s += v;
    m1 += v * k;
    m2 += v * static_cast<double>(k) * k;
  }
  m1 /= s;
  m2 /= s;
  return (m2 - m1 * m1) * mu * mu;
}

ProfileStats profile_stats(const ExperimentConfig& c, const Point& p, CounterRng rng, int threads) {
  const Sampler sampler(c, p, rng);
  const std::size_t n = static_cast<std::size_t>(c.sampling.n_theta);
  std::vector<std::map<int, double>> weights(n);
  std::vector<double> mus(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const Draw d = sampler.draw(i);
    const auto hs = simulate_harmonic(*d.model, d.theta);
    require_harmonic(*d.model, hs);
    mus[i] = hs.mu()(0);
    for (const auto& [k, v] : frequency_weights(hs)) weights[i][k[0]] = v;
  });
  ProfileStats st;
  st.samples = n;
  st.mu = mus[0];
  std::map<int, double> sum, sum2;
  for (const auto& w : weights) {
    for (const auto& [k, v] : w) {
      sum[k] += v;
      sum2[k] += v * v;
    }
  }
  const double dn = static_cast<double>(n);
  for (const auto& [k, s] : sum) {
    const double m = s / dn;
    st.mean[k] = m;
    st.se[k] = n > 1 ? std::sqrt(std::max(0.0, (sum2[k] / dn - m * m) * dn / (dn - 1.0)) / dn) : 0.0;
  }
  st.variance = profile_variance(st.mean, st.mu);
  // Batch means over samples for the variance of the mean profile.
  const int batches = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(c.sampling.batches), n / 2));
  if (batches >= 2) {
    std::vector<double> vs;
    for (int b = 0; b < batches; ++b) {
      std::map<int, double> acc;
      const std::size_t lo = n * b / batches, hi = n * (b + 1) / batches;
      for (std::size_t i = lo; i < hi; ++i) {
        for (const auto& [k, v] : weights[i]) acc[k] += v;
      }
      vs.push_back(profile_variance(acc, st.mu));
    }
    double se = 0.0;
    mean_se(vs, &se);
    st.variance_se = se;
  }
  return st;
}

// Inner thread budget when sweep points already run in parallel.
int inner_threads(const ExperimentConfig& c, std::size_t points) {
  return points >= static_cast<std::size_t>(c.threads) ? 1 : std::max(1, c.threads / static_cast<int>(points));
}

template <class F>
void for_points(const ExperimentConfig& c, const std::vector<Point>& points, F&& f) {
  const int outer = std::min<int>(c.threads, static_cast<int>(points.size()));
  parallel_for(points.size(), outer, [&](std::size_t i) { f(points[i]); });
}

ExperimentOutput gradient_scan(const ExperimentConfig& c) {
  const auto points = sweep(c);
  const int inner = inner_threads(c, points.size());
  std::vector<std::pair<VarianceScan, std::size_t>> scans(points.size());
  const CounterRng root(c.seed);
  for_points(c, points, [&](const Point& p) {
    CounterRng rng = root.split(p.index);
    CounterRng build = rng.split(0);
    const auto inst = build_model(c.model, p.n_qubits, p.layers, p.depth, build);
    if (inst.model.n_params() == 0) throw ValidationError("model has no trainable parameters");
    ScanOptions opt;
    opt.batches = c.sampling.batches;
    opt.threads = inner;
    scans[p.index] = {variance_scan(inst.model, inst.sampler, c.sampling.data, c.sampling.n_theta, c.sampling.n_x,
                                    rng.split(1)(), opt),
                      inst.model.n_params()};
  });
  ExperimentOutput out;
  out.table.columns = {"n_qubits", "depth", "L", "param", "mean_var", "mean_var_se", "var_at_zero", "var_at_zero_se",
                       "difference", "difference_se", "var_of_mean", "jensen_gap_se"};
  out.summary["points"] = ordered_json::array();
  for (const auto& p : points) {
    const auto& s = scans[p.index].first;
    for (std::size_t j = 0; j < scans[p.index].second; ++j) {
      const auto J = static_cast<Eigen::Index>(j);
      auto row = point_cells(p);
      for (Cell v : {Cell(static_cast<long long>(j)), Cell(s.mean_var(J)), Cell(s.mean_var_se(J)),
                     Cell(s.var_at_zero(J)), Cell(s.var_at_zero_se(J)), Cell(s.mean_var(J) - s.var_at_zero(J)),
                     Cell(s.diff_se(J)), Cell(s.var_of_mean(J)), Cell(s.jensen_se(J))}) {
        row.push_back(v);
      }
      out.table.add(std::move(row));
    }
    auto js = point_json(p);
    js["n_theta"] = s.n_theta;
    js["n_x"] = s.n_x;
    js["batches"] = s.n_batches;
    js["grad_norm_mean"] = s.grad_norm_mean;
    js["grad_norm_se"] = s.grad_norm_se;
    out.summary["points"].push_back(js);
  }
  return out;
}

double sigma2_physical(const SpectrumKernel& k) {
  const auto m = kernel_moments(k);
  const double mu = k.mu()(0);
  return m.covariance(0, 0) * mu * mu;
}

ExperimentOutput frequency_profile(const ExperimentConfig& c) {
  const auto points = sweep(c);
  const int inner = inner_threads(c, points.size());
  std::vector<ProfileStats> stats(points.size());
  std::vector<SpectrumKernel> kernels(points.size());
  const CounterRng root(c.seed);
  for_points(c, points, [&](const Point& p) {
    stats[p.index] = profile_stats(c, p, root.split(p.index), inner);
    CounterRng build = root.split(p.index).split(0);
    const auto inst = build_model(c.model, p.n_qubits, p.layers, p.depth, build);
    kernels[p.index] = power_convolve(encoding_kernel(c, inst.model), encoding_count(inst.model));
  });
  ExperimentOutput out;
  out.table.columns = {"n_qubits", "depth", "L", "k", "frequency", "mean_weight", "weight_se", "kernel_weight",
                       "fitted_variance", "fitted_variance_se", "predicted_variance"};
  out.summary["points"] = ordered_json::array();
  for (const auto& p : points) {
    const auto& st = stats[p.index];
    const auto& K = kernels[p.index];
    // Kernel and state lattices may differ by the base frequency; compare in
    // physical frequency.
    const double kmu = K.mu()(0);
    const double predicted = sigma2_physical(K);
    for (const auto& [k, m] : st.mean) {
      const double f = k * st.mu;
      const double kk = f / kmu;
      const int ki = static_cast<int>(std::lround(kk));
      const double kw = std::abs(kk - ki) < 1e-9 ? K.weight({ki}) : 0.0;
      auto row = point_cells(p);
      for (Cell v : {Cell(static_cast<long long>(k)), Cell(f), Cell(m), Cell(st.se.at(k)), Cell(kw), Cell(st.variance),
                     Cell(st.variance_se), Cell(predicted)}) {
        row.push_back(v);
      }
      out.table.add(std::move(row));
    }
    auto js = point_json(p);
    js["samples"] = st.samples;
    js["mu"] = st.mu;
    js["fitted_variance"] = st.variance;
    js["fitted_variance_se"] = st.variance_se;
    js["predicted_variance"] = predicted;
    out.summary["points"].push_back(js);
  }
  return out;
}

struct LineFit {
  double slope = 0, slope_se = 0, intercept = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

ExperimentOutput variance_scaling(const ExperimentConfig& c) {
  const auto points = sweep(c);
  const int inner = inner_threads(c, points.size());
  std::vector<ProfileStats> stats(points.size());
  std::vector<double> sigma2(points.size());
  const CounterRng root(c.seed);
  for_points(c, points, [&](const Point& p) {
    stats[p.index] = profile_stats(c, p, root.split(p.index), inner);
    CounterRng build = root.split(p.index).split(0);
    const auto inst = build_model(c.model, p.n_qubits, p.layers, p.depth, build);
    sigma2[p.index] = sigma2_physical(encoding_kernel(c, inst.model));
  });
  ExperimentOutput out;
  out.table.columns = {"n_qubits", "depth", "L", "fitted_variance", "fitted_variance_se", "predicted_variance",
                       "sigma_g2"};
  std::map<std::pair<int, int>, std::pair<std::vector<double>, std::vector<double>>> series;
  std::map<std::pair<int, int>, double> sig;
  for (const auto& p : points) {
    const auto& st = stats[p.index];
    // Variance grows with the number of encodings, which equals L for the
    // families; explicit step lists count their own encodings.
    out.table.add({Cell(p.n_qubits), Cell(p.depth), Cell(p.layers), Cell(st.variance), Cell(st.variance_se),
                   Cell(sigma2[p.index] * p.layers), Cell(sigma2[p.index])});
    auto& s = series[{p.n_qubits, p.depth}];
    s.first.push_back(p.layers);
    s.second.push_back(st.variance);
    sig[{p.n_qubits, p.depth}] = sigma2[p.index];
  }
  out.summary["fits"] = ordered_json::array();
  for (const auto& [key, s] : series) {
    ordered_json js{{"n_qubits", key.first}, {"depth", key.second}, {"points", s.first.size()}};
    if (s.first.size() >= 2) {
      const auto f = fit_line(s.first, s.second);
      js["slope"] = f.slope;
      js["slope_se"] = f.slope_se;
      js["intercept"] = f.intercept;
    }
    js["predicted_slope"] = sig[key];
    out.summary["fits"].push_back(js);
  }
  return out;
}

ExperimentOutput lipschitz_cdf(const ExperimentConfig& c) {
  const auto points = sweep(c);
  const int inner = inner_threads(c, points.size());
  struct Result {
    DeviationTable table;
    std::vector<double> lambda, numeric;
    AverageBounds bounds;
    double norm = 0;
  };
  std::vector<Result> results(points.size());
  const CounterRng root(c.seed);
  for_points(c, points, [&](const Point& p) {
    const Sampler sampler(c, p, root.split(p.index));
    const auto kernel = encoding_kernel(c, sampler.fixed().model);
    const int L = encoding_count(sampler.fixed().model);
    const std::size_t n = static_cast<std::size_t>(c.sampling.n_theta);
    Result& r = results[p.index];
    r.lambda.resize(n);
    r.numeric.resize(n);
    parallel_for(n, inner, [&](std::size_t i) {
      const Draw d = sampler.draw(i);
      const auto hs = simulate_harmonic(*d.model, d.theta);
      require_harmonic(*d.model, hs);
      const auto prof = measure_fourier(hs, d.model->observable());
      r.lambda[i] = lambda_bound(prof);
      const int grid = c.lipschitz.grid_points > 0 ? c.lipschitz.grid_points : 8 * prof.max_index() + 16;
      r.numeric[i] = numeric_lipschitz(prof, grid);
    });
    r.norm = sampler.fixed().model.observable().max_abs_eigenvalue();
    r.bounds = average_bounds(kernel, L, r.norm);
    r.table = deviation_cdf(Eigen::Map<const RealVector>(r.lambda.data(), static_cast<Eigen::Index>(n)), kernel, L,
                            r.norm, c.lipschitz.t_points);
  });
  ExperimentOutput out;
  out.table.columns = {"n_qubits", "depth", "L", "t", "empirical", "empirical_se", "coarse_bound", "refined_bound"};
  out.summary["points"] = ordered_json::array();
  for (const auto& p : points) {
    const auto& r = results[p.index];
    const double n = static_cast<double>(r.lambda.size());
    for (const auto& row : r.table.rows) {
      auto cells = point_cells(p);
      for (Cell v : {Cell(row.t), Cell(row.empirical), Cell(std::sqrt(row.empirical * (1 - row.empirical) / n)),
                     Cell(row.coarse_bound), Cell(row.refined_bound)}) {
        cells.push_back(v);
      }
      out.table.add(std::move(cells));
    }
    double se_l = 0, se_n = 0;
    const double ml = mean_se(r.lambda, &se_l), mn = mean_se(r.numeric, &se_n);
    std::vector<double> sorted = r.lambda;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    auto js = point_json(p);
    js["samples"] = r.lambda.size();
    js["observable_norm"] = r.norm;
    js["lambda_mean"] = ml;
    js["lambda_se"] = se_l;
    js["lambda_median"] = median;
    js["numeric_lipschitz_mean"] = mn;
    js["numeric_lipschitz_se"] = se_n;
    js["theory_lower"] = r.bounds.lower;
    js["theory_upper"] = r.bounds.upper;
    js["reference"] = r.table.reference;
    out.summary["points"].push_back(js);
  }
  return out;
}

ExperimentOutput witness_audit(const ExperimentConfig& c) {
  const auto points = sweep(c);
  const int inner = inner_threads(c, points.size());
  struct Result {
    std::vector<WitnessEstimate> right, left;
    std::vector<VarianceBoundReport> reports;
  };
  std::vector<Result> results(points.size());
  const CounterRng root(c.seed);
  for_points(c, points, [&](const Point& p) {
    CounterRng rng = root.split(p.index);
    CounterRng build = rng.split(0);
    const auto inst = build_model(c.model, p.n_qubits, p.layers, p.depth, build);
    if (inst.model.n_params() == 0) throw ValidationError("model has no trainable parameters");
    ScanOptions opt;
    opt.batches = c.sampling.batches;
    opt.threads = inner;
    const auto scan = variance_scan(inst.model, inst.sampler, c.sampling.data, c.sampling.n_theta, c.sampling.n_x,
                                    rng.split(1)(), opt);
    Result& r = results[p.index];
    for (std::size_t j = 0; j < inst.model.n_params(); ++j) {
      const auto n_theta = static_cast<std::size_t>(c.sampling.n_theta), n_x = static_cast<std::size_t>(c.sampling.n_x);
      r.right.push_back(absorption_witness(inst.model, j, WitnessSide::right, inst.sampler, c.sampling.data, n_theta,
                                           n_x, rng.split(2 + 2 * j)(), inner));
      r.left.push_back(absorption_witness(inst.model, j, WitnessSide::left, inst.sampler, c.sampling.data, n_theta,
                                          n_x, rng.split(3 + 2 * j)(), inner));
      r.reports.push_back(check_variance_bound(inst.model, scan, r.right.back(), r.left.back()));
    }
  });
  ExperimentOutput out;
  out.table.columns = {"n_qubits", "depth", "L",          "param",     "right_witness", "right_se", "right_bias",
                       "left_witness", "left_se", "left_bias", "variance_difference", "bound", "tolerance", "pass"};
  ordered_json all_pass = true;
  for (const auto& p : points) {
    const auto& r = results[p.index];
    for (std::size_t j = 0; j < r.reports.size(); ++j) {
      auto row = point_cells(p);
      const auto& rep = r.reports[j];
      for (Cell v : {Cell(static_cast<long long>(j)), Cell(r.right[j].value), Cell(r.right[j].se),
                     Cell(r.right[j].bias), Cell(r.left[j].value), Cell(r.left[j].se), Cell(r.left[j].bias),
                     Cell(rep.lhs), Cell(rep.rhs), Cell(rep.tolerance), Cell(rep.pass ? 1LL : 0LL)}) {
        row.push_back(v);
      }
      if (!rep.pass) all_pass = false;
      out.table.add(std::move(row));
    }
  }
  out.summary["all_bounds_hold"] = all_pass;
  return out;
}

ExperimentOutput train_experiment(const ExperimentConfig& c) {
  const auto points = sweep(c);
  struct Result {
    TrainResult r;
  };
  std::vector<Result> results(points.size());
  const CounterRng root(c.seed);
  const int max_k = c.train.max_k.value_or(2 * c.train.K_target + 10);
  for_points(c, points, [&](const Point& p) {
    CounterRng rng = root.split(p.index);
    CounterRng build = rng.split(0);
    const auto inst = build_model(c.model, p.n_qubits, p.layers, p.depth, build);
    if (inst.model.n_params() == 0) throw ValidationError("model has no trainable parameters");
    const RealVector xs = uniform_grid(c.train.grid);
    RealVector target;
    if (c.train.target == TrainConfig::Target::step) {
      target = step_target(c.train.K_target, xs);
    } else {
      CounterRng star = rng.split(1);
      const RealVector theta_star = inst.sampler.sample(star);
      target = hypothesis_batch(inst.model, theta_star, xs);
    }
    TrainOptions opt;
    opt.learning_rate = c.train.learning_rate;
    opt.iterations = c.train.iterations;
    results[p.index].r = train(inst.model, inst.sampler, target, opt, rng.split(2)(), max_k);
  });
  ExperimentOutput out;
  out.table.columns = {"n_qubits", "depth", "L", "k", "fitted_abs", "target_abs"};
  out.summary["points"] = ordered_json::array();
  for (const auto& p : points) {
    const auto& r = results[p.index].r;
    for (int k = 0; k <= max_k; ++k) {
      auto row = point_cells(p);
      row.push_back(Cell(static_cast<long long>(k)));
      row.push_back(Cell(r.fitted_abs(k)));
      row.push_back(Cell(r.target_abs(k)));
      out.table.add(std::move(row));
    }
    auto js = point_json(p);
    js["initial_loss"] = r.loss.front();
    js["final_loss"] = r.loss.back();
    js["loss"] = r.loss;
    js["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
    out.summary["points"].push_back(js);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw Error("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

ExperimentOutput run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::gradient_scan: return gradient_scan(c);
    case ExperimentKind::frequency_profile: return frequency_profile(c);
    case ExperimentKind::variance_scaling: return variance_scaling(c);
    case ExperimentKind::lipschitz_cdf: return lipschitz_cdf(c);
    case ExperimentKind::witness_audit: return witness_audit(c);
    case ExperimentKind::train: return train_experiment(c);
  }
  throw Error("unknown experiment kind");
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) out += format_double(v);
            else if constexpr (std::is_same_v<T, long long>) out += std::to_string(v);
            else out += csv_field(v);
          },
          row[i]);
    }
    out += "\r\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const Table& t) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v)) obj[t.columns[i]] = v;
              else obj[t.columns[i]] = nullptr;
            } else {
              obj[t.columns[i]] = v;
            }
          },
          row[i]);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string data = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  char hex[2 * SHA_DIGEST_LENGTH + 1];
  for (int i = 0; i < SHA_DIGEST_LENGTH; ++i) std::snprintf(hex + 2 * i, 3, "%02x", digest[i]);
  return hex;
}

RunArtifacts run_and_write(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  RunArtifacts a;
  a.output = run_experiment(c);
  a.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  a.output_dir = c.output_dir;

  const std::string csv = to_csv(a.output.table);
  ordered_json results;
  results["experiment"] = kind_name(c.kind);
  results["columns"] = a.output.table.columns;
  results["rows"] = to_json(a.output.table);
  results["summary"] = a.output.summary;
  const std::string results_text = results.dump(2) + "\n";

  ordered_json manifest;
  manifest["experiment"] = kind_name(c.kind);
  manifest["seed"] = c.seed;
  manifest["threads"] = c.threads;
  manifest["config_file"] = c.source_name;
  manifest["config_sha1"] = git_blob_sha1(c.source_text);
  manifest["config"] = c.echo;
  manifest["config_text"] = c.source_text;
  manifest["results_csv_sha1"] = git_blob_sha1(csv);
  manifest["results_json_sha1"] = git_blob_sha1(results_text);
  manifest["wall_time_seconds"] = a.wall_seconds;
  manifest["timestamp"] = utc_timestamp();

  const std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "results.csv", csv);
  write_file(dir / "results.json", results_text);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return a;
}

}  // namespace qru
