#pragma once

// Quantum re-uploading circuits: description, statevector simulation,
// hypothesis evaluation and exact (adjoint, commutator-form) gradients.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qru/algebra.hpp"

namespace qru {

/// exp(i * generator * theta[param_index])
struct ParameterizedGate {
  HermitianGenerator generator;
  std::size_t param_index = 0;
};

struct FixedGate {
  ComplexMatrix unitary;
  std::string label;
};

/// exp(i * generator * x)
struct EncodingGate {
  HermitianGenerator generator;
};

struct GateStep {
  std::variant<ParameterizedGate, FixedGate, EncodingGate> kind;
  int layer_index = 0;

  bool is_parameterized() const { return std::holds_alternative<ParameterizedGate>(kind); }
  bool is_encoding() const { return std::holds_alternative<EncodingGate>(kind); }
  bool is_fixed() const { return std::holds_alternative<FixedGate>(kind); }
};

/// Steps are stored in application order: steps[0] acts first on the
/// initial state.
class QruModel {
 public:
  QruModel(int n_qubits, std::vector<GateStep> steps, HermitianGenerator observable,
           std::optional<ComplexVector> initial_state = std::nullopt);

  int n_qubits() const noexcept { return n_qubits_; }
  int dim() const noexcept { return 1 << n_qubits_; }
  const std::vector<GateStep>& steps() const noexcept { return steps_; }
  const HermitianGenerator& observable() const noexcept { return observable_; }
  const ComplexVector& initial_state() const noexcept { return initial_state_; }
  std::size_t n_params() const noexcept { return n_params_; }
  std::size_t n_encodings() const noexcept;

  /// Index into steps() of the gate carrying parameter j.
  std::size_t step_of_param(std::size_t j) const { return param_steps_.at(j); }

 private:
  int n_qubits_;
  std::vector<GateStep> steps_;
  HermitianGenerator observable_;
  ComplexVector initial_state_;
  std::size_t n_params_ = 0;
  std::vector<std::size_t> param_steps_;
};

/// Incremental construction; parameter indices are assigned in order and
/// layer indices count the encodings seen so far.
class ModelBuilder {
 public:
  explicit ModelBuilder(int n_qubits);

  ModelBuilder& param(const HermitianGenerator& generator);
  ModelBuilder& param(const GeneratorSpec& spec);
  ModelBuilder& fixed(const ComplexMatrix& unitary, std::string label = {});
  ModelBuilder& encode(const HermitianGenerator& generator);
  ModelBuilder& encode(const GeneratorSpec& spec);
  ModelBuilder& observable(const HermitianGenerator& h);
  ModelBuilder& observable(const GeneratorSpec& spec);
  ModelBuilder& initial_state(const ComplexVector& psi);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t n_params() const noexcept { return next_param_; }
  QruModel build() const;

 private:
  int n_qubits_;
  std::vector<GateStep> steps_;
  std::optional<HermitianGenerator> observable_;
  std::optional<ComplexVector> initial_;
  std::size_t next_param_ = 0;
  int layer_ = 0;
};

/// Applies one step in place; `x` only affects encoding steps.
void apply_step(const GateStep& step, const RealVector& theta, double x, ComplexVector& state);
/// Applies the inverse of one step in place.
void apply_step_inverse(const GateStep& step, const RealVector& theta, double x,
                        ComplexVector& state);

ComplexVector evaluate_state(const QruModel& model, const RealVector& theta, double x);
double hypothesis(const QruModel& model, const RealVector& theta, double x);
/// dh/dtheta_j = i <phi_j| [H_j, V_j] |phi_j>, evaluated with one forward
/// and one backward statevector sweep.
RealVector gradient(const QruModel& model, const RealVector& theta, double x);

struct ValueAndGradient {
  double value = 0.0;
  RealVector gradient;
};
ValueAndGradient value_and_gradient(const QruModel& model, const RealVector& theta, double x);

/// Hypothesis values for many inputs at once (columns are inputs).
RealVector hypothesis_batch(const QruModel& model, const RealVector& theta, const RealVector& xs);

/// Evaluates h(x_c) for all inputs, asks `weights_of` for per-input weights
/// w_c given those values, and returns (values, d/dtheta sum_c w_c h(x_c)).
struct BatchGradient {
  RealVector values;
  RealVector gradient;
};
BatchGradient weighted_batch_gradient(
    const QruModel& model, const RealVector& theta, const RealVector& xs,
    const std::function<RealVector(const RealVector& values)>& weights_of);

/// Gradient at each input: column c is grad h(xs[c]).
RealMatrix batch_gradients(const QruModel& model, const RealVector& theta, const RealVector& xs);

/// Same circuit with every encoding removed, i.e. the model at x = 0.
QruModel base_pqc(const QruModel& model);

/// Layer = parameterized/fixed block followed by one encoding gate.
struct Layer {
  std::vector<GateStep> block;
  HermitianGenerator encoding;
};

struct LayeredView {
  std::vector<Layer> layers;
  /// Steps after the last encoding (measurement-side block).
  std::vector<GateStep> dressing;
  std::size_t count() const noexcept { return layers.size(); }
};

LayeredView layered_view(const QruModel& model);

/// Unitary of a sequence of steps (application order) at given theta, x.
ComplexMatrix steps_unitary(const std::vector<GateStep>& steps, int dim, const RealVector& theta,
                            double x);

}  // namespace qru
