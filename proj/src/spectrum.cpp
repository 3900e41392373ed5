#include "qru/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "qru/errors.hpp"

namespace qru {

namespace {

constexpr std::int64_t kMaxDenominator = 1'000'000;
constexpr double kPi = 3.14159265358979323846;

// First continued-fraction convergent p/q of x with |x q - p| <= tol.
std::optional<std::pair<std::int64_t, std::int64_t>> rational_approx(double x, double tol) {
  const double sign = x < 0 ? -1.0 : 1.0;
  double rest = std::abs(x);
  std::int64_t p_prev = 1, p_prev2 = 0, q_prev = 0, q_prev2 = 1;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(rest);
    if (a_real > 1e12) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t p = a * p_prev + p_prev2;
    const std::int64_t q = a * q_prev + q_prev2;
    if (q > kMaxDenominator) break;
    if (std::abs(std::abs(x) * static_cast<double>(q) - static_cast<double>(p)) <= tol) {
      return std::make_pair(static_cast<std::int64_t>(sign) * p, q);
    }
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;
    const double frac = rest - a_real;
    if (frac <= 0.0) break;
    rest = 1.0 / frac;
  }
  return std::nullopt;
}

double spectrum_tolerance(const RealVector& eigenvalues) {
  const double scale = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * std::max(1.0, scale);
}

LatticePoint best_integer_fit(double lambda, const RealVector& mu, double tol) {
  const int d = static_cast<int>(mu.size());
  const double min_mu = mu.minCoeff();
  const int reach = static_cast<int>(std::ceil(std::abs(lambda) / min_mu)) + 2;
  const double cells = std::pow(2.0 * reach + 1.0, d);
  if (cells > 1e7) throw CapacityError("spectrum", "integer search space too large for mu hint");
  LatticePoint k(d, -reach), best;
  int best_l1 = std::numeric_limits<int>::max();
  while (true) {
    double value = 0.0;
    int l1 = 0;
    for (int i = 0; i < d; ++i) {
      value += mu(i) * k[static_cast<std::size_t>(i)];
      l1 += std::abs(k[static_cast<std::size_t>(i)]);
    }
    if (std::abs(value - lambda) <= tol && l1 < best_l1) {
      best = k;
      best_l1 = l1;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++k[static_cast<std::size_t>(i)] <= reach) break;
      k[static_cast<std::size_t>(i)] = -reach;
    }
    if (i == d) break;
  }
  if (best.empty()) {
    throw LatticeMismatchError("eigenvalue " + std::to_string(lambda) +
                               " is not an integer combination of the supplied mu");
  }
  return best;
}

}  // namespace

double FrequencyLattice::frequency(const LatticePoint& k) const {
  double f = 0.0;
  for (int d = 0; d < dims(); ++d) f += mu(d) * k[static_cast<std::size_t>(d)];
  return f;
}

bool same_basis(const RealVector& a, const RealVector& b, double rel_tol) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > rel_tol * std::max(std::abs(a(i)), std::abs(b(i)))) return false;
  }
  return true;
}

LatticePoint add_points(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

LatticePoint negate_point(const LatticePoint& a) {
  LatticePoint out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return out;
}

SpectrumKernel::SpectrumKernel(RealVector mu, std::map<LatticePoint, double> weights,
                               int source_dim)
    : mu_(std::move(mu)), weights_(std::move(weights)), source_dim_(source_dim) {
  if (mu_.size() == 0) throw InvalidDimensionError("kernel needs at least one base frequency");
  if ((mu_.array() <= 0.0).any()) throw ValidationError("base frequencies must be positive");
  if (weights_.empty()) throw ValidationError("kernel has empty support");
  double total = 0.0;
  for (const auto& [k, w] : weights_) {
    if (static_cast<int>(k.size()) != dims()) throw InvalidDimensionError("lattice point rank mismatch");
    if (!(w > 0.0)) throw ValidationError("kernel weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("kernel weights must sum to 1");
}

SpectrumKernel SpectrumKernel::delta(const RealVector& mu) {
  return SpectrumKernel(mu, {{LatticePoint(static_cast<std::size_t>(mu.size()), 0), 1.0}}, 1);
}

double SpectrumKernel::weight(const LatticePoint& k) const {
  const auto it = weights_.find(k);
  return it == weights_.end() ? 0.0 : it->second;
}

std::vector<int> SpectrumKernel::support_bounds() const {
  std::vector<int> bounds(static_cast<std::size_t>(dims()), 0);
  for (const auto& [k, w] : weights_) {
    for (std::size_t d = 0; d < k.size(); ++d) bounds[d] = std::max(bounds[d], std::abs(k[d]));
  }
  return bounds;
}

SpectrumKernel SpectrumKernel::reflected() const {
  std::map<LatticePoint, double> out;
  for (const auto& [k, w] : weights_) out[negate_point(k)] = w;
  return SpectrumKernel(mu_, std::move(out), source_dim_);
}

std::optional<double> detect_base_frequency(const std::vector<double>& values) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 1.0;
  const double zero_tol = 1e-9 * scale;
  double r = scale;
  for (double v : values) {
    if (std::abs(v) > zero_tol) r = std::min(r, std::abs(v));
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> fractions;
  std::int64_t lcm = 1;
  for (double v : values) {
    if (std::abs(v) <= zero_tol) {
      fractions.emplace_back(0, 1);
      continue;
    }
    const double ratio = v / r;
    const auto frac = rational_approx(ratio, 1e-8 * std::max(1.0, std::abs(ratio)));
    if (!frac) return std::nullopt;
    lcm = std::lcm(lcm, frac->second);
    if (lcm > kMaxDenominator) return std::nullopt;
    fractions.push_back(*frac);
  }
  std::vector<std::int64_t> ints;
  std::int64_t g = 0;
  for (const auto& [p, q] : fractions) {
    ints.push_back(p * (lcm / q));
    g = std::gcd(g, std::abs(ints.back()));
  }
  // Least-squares refinement of mu given the integer multiples.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double k = static_cast<double>(ints[i] / g);
    num += values[i] * k;
    den += k * k;
  }
  return num / den;
}

SpectrumDecomposition decompose_spectrum(const HermitianGenerator& g,
                                         const std::optional<RealVector>& mu_hint) {
  const RealVector& lambda = g.eigenvalues();
  const double tol = spectrum_tolerance(lambda);
  RealVector mu;
  if (!mu_hint) {
    const std::vector<double> values(lambda.data(), lambda.data() + lambda.size());
    const auto base = detect_base_frequency(values);
    if (!base) {
      throw AnharmonicError("spectrum of " + (g.label().empty() ? std::string("generator") : g.label()) +
                            " has no common base frequency; pass a mu hint with one entry per "
                            "incommensurate frequency");
    }
    mu = RealVector::Constant(1, *base);
  } else {
    mu = *mu_hint;
    if (mu.size() == 0 || (mu.array() <= 0.0).any()) {
      throw ValidationError("mu hint entries must be positive");
    }
  }
  SpectrumDecomposition out;
  out.offsets.resize(static_cast<std::size_t>(lambda.size()));
  std::map<LatticePoint, double> weights;
  const double inv_n = 1.0 / static_cast<double>(lambda.size());
  for (const auto& space : g.eigenspaces()) {
    LatticePoint k;
    if (mu.size() == 1) {
      const double m = std::round(space.value / mu(0));
      if (std::abs(space.value - m * mu(0)) > tol) {
        throw LatticeMismatchError("eigenvalue " + std::to_string(space.value) +
                                   " is not an integer multiple of mu = " + std::to_string(mu(0)));
      }
      k = {static_cast<int>(m)};
    } else {
      k = best_integer_fit(space.value, mu, tol);
    }
    for (int i : space.indices) out.offsets[static_cast<std::size_t>(i)] = k;
    weights[k] += inv_n * static_cast<double>(space.indices.size());
  }
  out.kernel = SpectrumKernel(mu, std::move(weights), g.dim());
  return out;
}

SpectrumKernel extract_kernel(const HermitianGenerator& g, const std::optional<RealVector>& mu_hint) {
  return decompose_spectrum(g, mu_hint).kernel;
}

SpectrumKernel convolve(const SpectrumKernel& a, const SpectrumKernel& b, std::size_t capacity) {
  if (a.dims() != b.dims() || !same_basis(a.mu(), b.mu())) {
    throw LatticeMismatchError("cannot convolve kernels on different frequency lattices");
  }
  std::map<LatticePoint, double> out;
  for (const auto& [ka, wa] : a.weights()) {
    for (const auto& [kb, wb] : b.weights()) {
      out[add_points(ka, kb)] += wa * wb;
      if (out.size() > capacity) {
        throw CapacityError("spectrum", "convolution exceeds " + std::to_string(capacity) +
                                            " lattice points");
      }
    }
  }
  // Renormalize away the last-bit drift so repeated convolution keeps the
  // weight-sum invariant.
  double total = 0.0;
  for (const auto& [k, w] : out) total += w;
  for (auto it = out.begin(); it != out.end();) {
    it->second /= total;
    // Far tails of long convolutions underflow; an exact zero is no support.
    it = it->second > 0.0 ? std::next(it) : out.erase(it);
  }
  return SpectrumKernel(a.mu(), std::move(out), std::max(a.source_dim(), b.source_dim()));
}

SpectrumKernel power_convolve(const SpectrumKernel& k, int L, std::size_t capacity) {
  if (L < 1) throw OutOfRangeError("power_convolve needs L >= 1");
  std::optional<SpectrumKernel> result;
  SpectrumKernel base = k;
  for (int e = L;;) {
    if (e & 1) result = result ? convolve(*result, base, capacity) : base;
    e >>= 1;
    if (!e) break;
    base = convolve(base, base, capacity);
  }
  return *result;
}

KernelMoments kernel_moments(const SpectrumKernel& k) {
  const int d = k.dims();
  KernelMoments m{RealVector::Zero(d), RealMatrix::Zero(d, d)};
  for (const auto& [p, w] : k.weights()) {
    for (int i = 0; i < d; ++i) m.mean(i) += w * p[static_cast<std::size_t>(i)];
  }
  for (const auto& [p, w] : k.weights()) {
    RealVector diff(d);
    for (int i = 0; i < d; ++i) diff(i) = p[static_cast<std::size_t>(i)] - m.mean(i);
    m.covariance.noalias() += w * diff * diff.transpose();
  }
  return m;
}

double GaussianLimit::density(const LatticePoint& k) const {
  const int d = static_cast<int>(mean.size());
  RealVector diff(d);
  for (int i = 0; i < d; ++i) diff(i) = k[static_cast<std::size_t>(i)] - mean(i);
  Eigen::LLT<RealMatrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw ValidationError("Gaussian covariance is not positive definite");
  const RealVector z = llt.matrixL().solve(diff);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * d * std::log(2.0 * kPi));
}

GaussianLimit gaussian_limit(const SpectrumKernel& k, int L) {
  if (L < 1) throw OutOfRangeError("gaussian_limit needs L >= 1");
  const auto m = kernel_moments(k);
  return {static_cast<double>(L) * m.mean, static_cast<double>(L) * m.covariance};
}

double total_variation(const SpectrumKernel& k, const GaussianLimit& g) {
  double diff = 0.0, gaussian_mass = 0.0;
  for (const auto& [p, w] : k.weights()) {
    const double q = g.density(p);
    diff += std::abs(w - q);
    gaussian_mass += q;
  }
  return 0.5 * (diff + std::max(0.0, 1.0 - gaussian_mass));
}

nlohmann::ordered_json kernel_to_json(const SpectrumKernel& k) {
  nlohmann::ordered_json j;
  j["mu"] = std::vector<double>(k.mu().data(), k.mu().data() + k.mu().size());
  j["N"] = k.source_dim();
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [p, w] : k.weights()) entries.push_back({{"k", p}, {"w", w}});
  j["weights"] = std::move(entries);
  return j;
}

}  // namespace qru
