#pragma once

// Parameter and data distributions used by the Monte-Carlo estimators.

#include <cstddef>
#include <string>
#include <vector>

#include "qru/algebra.hpp"
#include "qru/rng.hpp"

namespace qru {

enum class ThetaKind {
  uniform,     // [0, 2 pi)
  haar_polar,  // arccos(1 - 2u) / 2: makes exp(iZa) exp(iYb) exp(iZc) Haar on SU(2)
};

class ThetaSampler {
 public:
  /// All parameters uniform on [0, 2 pi).
  explicit ThetaSampler(std::size_t n_params);
  explicit ThetaSampler(std::vector<ThetaKind> kinds);

  std::size_t size() const noexcept { return kinds_.size(); }
  const std::vector<ThetaKind>& kinds() const noexcept { return kinds_; }
  RealVector sample(CounterRng& rng) const;

 private:
  std::vector<ThetaKind> kinds_;
};

class DataSampler {
 public:
  enum class Kind { uniform, gaussian, dataset };

  static DataSampler uniform(double lo, double hi);
  static DataSampler gaussian(double mean, double stddev);
  static DataSampler dataset(std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double sample(CounterRng& rng) const;
  /// n independent draws; a dataset returns all of its points instead.
  RealVector draw(std::size_t n, CounterRng& rng) const;
  std::string describe() const;

 private:
  DataSampler() = default;

  Kind kind_ = Kind::uniform;
  double a_ = 0.0;
  double b_ = 1.0;
  std::vector<double> values_;
};

}  // namespace qru
