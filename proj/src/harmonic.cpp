#include "qru/harmonic.hpp"

#include <algorithm>
#include <cmath>

#include "qru/errors.hpp"

namespace qru {

namespace {

using ColumnMap = std::map<LatticePoint, ComplexVector>;

ColumnMap multiply_columns(const ColumnMap& columns, const ComplexMatrix& u) {
  if (columns.empty()) return {};
  const int d = static_cast<int>(u.rows());
  ComplexMatrix block(d, static_cast<Eigen::Index>(columns.size()));
  Eigen::Index c = 0;
  for (const auto& [k, v] : columns) block.col(c++) = v;
  const ComplexMatrix out = u * block;
  ColumnMap result;
  c = 0;
  for (const auto& [k, v] : columns) result.emplace(k, out.col(c++));
  return result;
}

}  // namespace

HarmonicState::HarmonicState(int n_qubits, RealVector mu, ColumnMap columns)
    : n_qubits_(n_qubits), mu_(std::move(mu)), columns_(std::move(columns)) {
  if (n_qubits_ < 1 || n_qubits_ > kMaxQubits) throw InvalidDimensionError("n_qubits out of range");
  for (const auto& [k, v] : columns_) {
    if (v.size() != dim()) throw InvalidDimensionError("harmonic column dimension mismatch");
    if (static_cast<Eigen::Index>(k.size()) != mu_.size()) {
      throw InvalidDimensionError("lattice point rank mismatch");
    }
  }
}

FrequencyLattice HarmonicState::lattice() const {
  std::vector<int> bounds(static_cast<std::size_t>(mu_.size()), 0);
  for (const auto& [k, v] : columns_) {
    for (std::size_t d = 0; d < k.size(); ++d) bounds[d] = std::max(bounds[d], std::abs(k[d]));
  }
  return {mu_, bounds};
}

double HarmonicState::total_norm() const {
  double total = 0.0;
  for (const auto& [k, v] : columns_) total += v.squaredNorm();
  return total;
}

ComplexVector HarmonicState::state_at(double x) const {
  const FrequencyLattice lat{mu_, {}};
  ComplexVector psi = ComplexVector::Zero(dim());
  for (const auto& [k, v] : columns_) psi += std::polar(1.0, lat.frequency(k) * x) * v;
  return psi;
}

HarmonicState init_harmonic(const ComplexVector& state, const RealVector& mu) {
  if (std::abs(state.norm() - 1.0) > 1e-10) throw ValidationError("initial state is not normalized");
  const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(state.size()))));
  if ((1 << n) != state.size()) throw InvalidDimensionError("state length is not a power of two");
  ColumnMap columns;
  columns.emplace(LatticePoint(static_cast<std::size_t>(mu.size()), 0), state);
  return HarmonicState(n, mu, std::move(columns));
}

HarmonicState apply_unitary(const HarmonicState& hs, const ComplexMatrix& u) {
  if (u.rows() != hs.dim() || u.cols() != hs.dim()) {
    throw InvalidDimensionError("unitary dimension does not match harmonic state");
  }
  return HarmonicState(hs.n_qubits(), hs.mu(), multiply_columns(hs.columns(), u));
}

HarmonicState apply_encoding(const HarmonicState& hs, const HermitianGenerator& g,
                             const std::vector<LatticePoint>& offsets,
                             const HarmonicOptions& options) {
  if (g.dim() != hs.dim()) throw InvalidDimensionError("encoding generator dimension mismatch");
  if (offsets.size() != static_cast<std::size_t>(g.dim())) {
    throw InvalidDimensionError("need one lattice offset per eigenvalue");
  }
  // Group eigen-indices by offset so each shift is one masked copy.
  std::map<LatticePoint, std::vector<int>> groups;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (static_cast<Eigen::Index>(offsets[i].size()) != hs.mu().size()) {
      throw LatticeMismatchError("encoding offsets do not match the state lattice");
    }
    groups[offsets[i]].push_back(static_cast<int>(i));
  }
  const ColumnMap rotated = multiply_columns(hs.columns(), g.eigenvectors().adjoint());
  ColumnMap shifted;
  for (const auto& [k, y] : rotated) {
    for (const auto& [off, idx] : groups) {
      const LatticePoint target = add_points(k, off);
      auto it = shifted.find(target);
      if (it == shifted.end()) {
        it = shifted.emplace(target, ComplexVector::Zero(hs.dim())).first;
        if (shifted.size() > options.capacity) {
          throw CapacityError("harmonic", "state exceeds " + std::to_string(options.capacity) +
                                              " populated lattice points");
        }
      }
      for (int i : idx) it->second(i) += y(i);
    }
  }
  ColumnMap back = multiply_columns(shifted, g.eigenvectors());
  for (auto it = back.begin(); it != back.end();) {
    auto& v = it->second;
    for (int i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) < options.prune_tol) v(i) = 0.0;
    }
    it = v.isZero(0.0) ? back.erase(it) : std::next(it);
  }
  return HarmonicState(hs.n_qubits(), hs.mu(), std::move(back));
}

RealVector joint_mu(const QruModel& model, const std::optional<RealVector>& mu_hint) {
  if (mu_hint) return *mu_hint;
  std::vector<double> pooled;
  for (const auto& step : model.steps()) {
    if (const auto* e = std::get_if<EncodingGate>(&step.kind)) {
      const auto& ev = e->generator.eigenvalues();
      pooled.insert(pooled.end(), ev.data(), ev.data() + ev.size());
    }
  }
  const auto mu = detect_base_frequency(pooled);
  if (!mu) {
    throw AnharmonicError("encoding spectra share no common base frequency; supply a mu vector");
  }
  return RealVector::Constant(1, *mu);
}

HarmonicState simulate_harmonic(const QruModel& model, const RealVector& theta,
                                const std::optional<RealVector>& mu_hint,
                                const HarmonicOptions& options) {
  if (static_cast<std::size_t>(theta.size()) != model.n_params()) {
    throw ArityError("expected " + std::to_string(model.n_params()) + " parameters, got " +
                     std::to_string(theta.size()));
  }
  const RealVector mu = joint_mu(model, mu_hint);
  HarmonicState hs = init_harmonic(model.initial_state(), mu);
  for (const auto& step : model.steps()) {
    if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
      hs = apply_unitary(hs, expm_i(p->generator, theta(static_cast<Eigen::Index>(p->param_index))));
    } else if (const auto* f = std::get_if<FixedGate>(&step.kind)) {
      hs = apply_unitary(hs, f->unitary);
    } else {
      const auto& g = std::get<EncodingGate>(step.kind).generator;
      hs = apply_encoding(hs, g, decompose_spectrum(g, mu).offsets, options);
    }
  }
  return hs;
}

std::map<LatticePoint, double> frequency_weights(const HarmonicState& hs) {
  std::map<LatticePoint, double> out;
  for (const auto& [k, v] : hs.columns()) out.emplace(k, v.squaredNorm());
  return out;
}

FrequencyProfile::FrequencyProfile(RealVector mu, std::map<LatticePoint, Complex> coefficients,
                                   double observable_norm)
    : mu_(std::move(mu)), coefficients_(std::move(coefficients)), observable_norm_(observable_norm) {}

Complex FrequencyProfile::coefficient(const LatticePoint& w) const {
  const auto it = coefficients_.find(w);
  return it == coefficients_.end() ? Complex(0.0) : it->second;
}

double FrequencyProfile::frequency(const LatticePoint& w) const {
  return FrequencyLattice{mu_, {}}.frequency(w);
}

int FrequencyProfile::max_index() const {
  int m = 0;
  for (const auto& [w, a] : coefficients_) {
    for (int v : w) m = std::max(m, std::abs(v));
  }
  return m;
}

double FrequencyProfile::value(double x) const {
  double h = 0.0;
  for (const auto& [w, a] : coefficients_) h += (a * std::polar(1.0, frequency(w) * x)).real();
  return h;
}

double FrequencyProfile::derivative(double x) const {
  double dh = 0.0;
  for (const auto& [w, a] : coefficients_) {
    const double f = frequency(w);
    dh += (Complex(0.0, f) * a * std::polar(1.0, f * x)).real();
  }
  return dh;
}

FrequencyProfile measure_fourier(const HarmonicState& hs, const HermitianGenerator& h) {
  if (h.dim() != hs.dim()) throw InvalidDimensionError("observable dimension mismatch");
  const ColumnMap d = multiply_columns(hs.columns(), h.eigenvectors().adjoint());
  const RealVector& lambda = h.eigenvalues();
  std::vector<std::pair<LatticePoint, ComplexVector>> cols(d.begin(), d.end());
  std::vector<ComplexVector> weighted;
  weighted.reserve(cols.size());
  for (const auto& [k, v] : cols) weighted.push_back(lambda.cast<Complex>().cwiseProduct(v));
  // h(x) = sum_{k,l} c_l^dag H c_k exp(i mu.(k - l) x)
  std::map<LatticePoint, Complex> coeffs;
  for (std::size_t a = 0; a < cols.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const LatticePoint w = add_points(cols[a].first, negate_point(cols[b].first));
      coeffs[w] += cols[b].second.dot(weighted[a]);
    }
  }
  return FrequencyProfile(hs.mu(), std::move(coeffs), h.max_abs_eigenvalue());
}

nlohmann::ordered_json profile_to_json(const FrequencyProfile& p) {
  nlohmann::ordered_json j;
  j["mu"] = std::vector<double>(p.mu().data(), p.mu().data() + p.mu().size());
  j["observable_norm"] = p.observable_norm();
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [w, a] : p.coefficients()) {
    entries.push_back({{"k", w}, {"re", a.real()}, {"im", a.imag()}});
  }
  j["entries"] = std::move(entries);
  return j;
}

}  // namespace qru
