#include "qru/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qru/errors.hpp"

namespace qru {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

ThetaSampler::ThetaSampler(std::size_t n_params) : kinds_(n_params, ThetaKind::uniform) {}

ThetaSampler::ThetaSampler(std::vector<ThetaKind> kinds) : kinds_(std::move(kinds)) {}

RealVector ThetaSampler::sample(CounterRng& rng) const {
  RealVector theta(static_cast<Eigen::Index>(kinds_.size()));
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    const double u = rng.uniform();
    theta(static_cast<Eigen::Index>(i)) =
        kinds_[i] == ThetaKind::uniform ? kTwoPi * u : 0.5 * std::acos(1.0 - 2.0 * u);
  }
  return theta;
}

DataSampler DataSampler::uniform(double lo, double hi) {
  if (!(hi > lo)) throw ValidationError("uniform data range needs hi > lo");
  DataSampler s;
  s.kind_ = Kind::uniform;
  s.a_ = lo;
  s.b_ = hi;
  return s;
}

DataSampler DataSampler::gaussian(double mean, double stddev) {
  if (!(stddev > 0.0)) throw ValidationError("gaussian data needs std > 0");
  DataSampler s;
  s.kind_ = Kind::gaussian;
  s.a_ = mean;
  s.b_ = stddev;
  return s;
}

DataSampler DataSampler::dataset(std::vector<double> values) {
  if (values.empty()) throw ValidationError("dataset must not be empty");
  DataSampler s;
  s.kind_ = Kind::dataset;
  s.values_ = std::move(values);
  return s;
}

double DataSampler::sample(CounterRng& rng) const {
  switch (kind_) {
    case Kind::uniform: return a_ + (b_ - a_) * rng.uniform();
    case Kind::gaussian: {
      std::normal_distribution<double> normal(a_, b_);
      return normal(rng);
    }
    case Kind::dataset: {
      const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(values_.size()));
      return values_[std::min(i, values_.size() - 1)];
    }
  }
  return 0.0;
}

RealVector DataSampler::draw(std::size_t n, CounterRng& rng) const {
  if (kind_ == Kind::dataset) {
    return Eigen::Map<const RealVector>(values_.data(), static_cast<Eigen::Index>(values_.size()));
  }
  RealVector xs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) xs(static_cast<Eigen::Index>(i)) = sample(rng);
  return xs;
}

std::string DataSampler::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::uniform: out << "uniform(" << a_ << "," << b_ << ")"; break;
    case Kind::gaussian: out << "gaussian(" << a_ << "," << b_ << ")"; break;
    case Kind::dataset: out << "dataset(" << values_.size() << " points)"; break;
  }
  return out.str();
}

}  // namespace qru
