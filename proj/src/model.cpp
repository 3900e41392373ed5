#include "qru/model.hpp"

#include <cmath>

#include "qru/errors.hpp"

namespace qru {

namespace {

void check_generator_dim(const HermitianGenerator& g, int dim, const char* what) {
  if (g.dim() != dim) {
    throw InvalidDimensionError(std::string(what) + " has dimension " + std::to_string(g.dim()) +
                                ", expected " + std::to_string(dim));
  }
}

void check_arity(const QruModel& model, const RealVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.n_params()) {
    throw ArityError("expected " + std::to_string(model.n_params()) + " parameters, got " +
                     std::to_string(theta.size()));
  }
}

// Block versions of apply_step: every column is a state; encodings use the
// per-column input xs(c).
void apply_block(const GateStep& step, const RealVector& theta, const RealVector& xs,
                 ComplexMatrix& states) {
  if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
    states = p->generator.apply_exp(theta(static_cast<Eigen::Index>(p->param_index)), states);
  } else if (const auto* f = std::get_if<FixedGate>(&step.kind)) {
    states = f->unitary * states;
  } else {
    const auto& e = std::get<EncodingGate>(step.kind);
    states = e.generator.apply_exp_columns(xs, states);
  }
}

void apply_block_inverse(const GateStep& step, const RealVector& theta, const RealVector& xs,
                         ComplexMatrix& states) {
  if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
    states = p->generator.apply_exp(-theta(static_cast<Eigen::Index>(p->param_index)), states);
  } else if (const auto* f = std::get_if<FixedGate>(&step.kind)) {
    states = f->unitary.adjoint() * states;
  } else {
    const auto& e = std::get<EncodingGate>(step.kind);
    states = e.generator.apply_exp_columns(-xs, states);
  }
}

ComplexMatrix forward_block(const QruModel& model, const RealVector& theta, const RealVector& xs) {
  ComplexMatrix states = model.initial_state().replicate(1, xs.size());
  for (const auto& step : model.steps()) apply_block(step, theta, xs, states);
  return states;
}

RealVector expectations(const HermitianGenerator& h, const ComplexMatrix& states) {
  const ComplexMatrix hs = h.matrix() * states;
  RealVector values(states.cols());
  for (int c = 0; c < states.cols(); ++c) values(c) = states.col(c).dot(hs.col(c)).real();
  return values;
}

}  // namespace

QruModel::QruModel(int n_qubits, std::vector<GateStep> steps, HermitianGenerator observable,
                   std::optional<ComplexVector> initial_state)
    : n_qubits_(n_qubits), steps_(std::move(steps)), observable_(std::move(observable)) {
  if (n_qubits_ < 1 || n_qubits_ > kMaxQubits) {
    throw InvalidDimensionError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
  const int d = dim();
  check_generator_dim(observable_, d, "observable");
  if (initial_state) {
    if (initial_state->size() != d) throw InvalidDimensionError("initial state dimension mismatch");
    if (std::abs(initial_state->norm() - 1.0) > 1e-12) {
      throw ValidationError("initial state must be normalized");
    }
    initial_state_ = *initial_state;
  } else {
    initial_state_ = ComplexVector::Zero(d);
    initial_state_(0) = 1.0;
  }
  std::vector<bool> seen;
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    const auto& step = steps_[s];
    if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
      check_generator_dim(p->generator, d, "parameterized generator");
      if (p->param_index >= seen.size()) seen.resize(p->param_index + 1, false);
      if (seen[p->param_index]) {
        throw ValidationError("parameter index " + std::to_string(p->param_index) + " used twice");
      }
      seen[p->param_index] = true;
    } else if (const auto* f = std::get_if<FixedGate>(&step.kind)) {
      if (f->unitary.rows() != d || f->unitary.cols() != d) {
        throw InvalidDimensionError("fixed gate dimension mismatch");
      }
    } else {
      check_generator_dim(std::get<EncodingGate>(step.kind).generator, d, "encoding generator");
    }
  }
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (!seen[j]) throw ValidationError("parameter indices must be contiguous; missing " + std::to_string(j));
  }
  n_params_ = seen.size();
  param_steps_.assign(n_params_, 0);
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    if (const auto* p = std::get_if<ParameterizedGate>(&steps_[s].kind)) param_steps_[p->param_index] = s;
  }
}

std::size_t QruModel::n_encodings() const noexcept {
  std::size_t count = 0;
  for (const auto& s : steps_) count += s.is_encoding() ? 1 : 0;
  return count;
}

ModelBuilder::ModelBuilder(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw InvalidDimensionError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
}

ModelBuilder& ModelBuilder::param(const HermitianGenerator& generator) {
  steps_.push_back({ParameterizedGate{generator, next_param_++}, layer_});
  return *this;
}

ModelBuilder& ModelBuilder::param(const GeneratorSpec& spec) {
  return param(build_generator(spec, n_qubits_));
}

ModelBuilder& ModelBuilder::fixed(const ComplexMatrix& unitary, std::string label) {
  steps_.push_back({FixedGate{unitary, std::move(label)}, layer_});
  return *this;
}

ModelBuilder& ModelBuilder::encode(const HermitianGenerator& generator) {
  steps_.push_back({EncodingGate{generator}, layer_++});
  return *this;
}

ModelBuilder& ModelBuilder::encode(const GeneratorSpec& spec) {
  return encode(build_generator(spec, n_qubits_));
}

ModelBuilder& ModelBuilder::observable(const HermitianGenerator& h) {
  observable_ = h;
  return *this;
}

ModelBuilder& ModelBuilder::observable(const GeneratorSpec& spec) {
  return observable(build_generator(spec, n_qubits_));
}

ModelBuilder& ModelBuilder::initial_state(const ComplexVector& psi) {
  initial_ = psi;
  return *this;
}

QruModel ModelBuilder::build() const {
  HermitianGenerator h = observable_ ? *observable_
                                     : build_generator(GeneratorSpec::pauli_string("Z0"), n_qubits_);
  return QruModel(n_qubits_, steps_, std::move(h), initial_);
}

void apply_step(const GateStep& step, const RealVector& theta, double x, ComplexVector& state) {
  if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
    state = p->generator.apply_exp(theta(static_cast<Eigen::Index>(p->param_index)), state);
  } else if (const auto* f = std::get_if<FixedGate>(&step.kind)) {
    state = f->unitary * state;
  } else {
    state = std::get<EncodingGate>(step.kind).generator.apply_exp(x, state);
  }
}

void apply_step_inverse(const GateStep& step, const RealVector& theta, double x,
                        ComplexVector& state) {
  if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
    state = p->generator.apply_exp(-theta(static_cast<Eigen::Index>(p->param_index)), state);
  } else if (const auto* f = std::get_if<FixedGate>(&step.kind)) {
    state = f->unitary.adjoint() * state;
  } else {
    state = std::get<EncodingGate>(step.kind).generator.apply_exp(-x, state);
  }
}

ComplexVector evaluate_state(const QruModel& model, const RealVector& theta, double x) {
  check_arity(model, theta);
  ComplexVector state = model.initial_state();
  for (const auto& step : model.steps()) apply_step(step, theta, x, state);
  return state;
}

double hypothesis(const QruModel& model, const RealVector& theta, double x) {
  const ComplexVector psi = evaluate_state(model, theta, x);
  return psi.dot(model.observable().matrix() * psi).real();
}

RealVector hypothesis_batch(const QruModel& model, const RealVector& theta, const RealVector& xs) {
  check_arity(model, theta);
  return expectations(model.observable(), forward_block(model, theta, xs));
}

BatchGradient weighted_batch_gradient(
    const QruModel& model, const RealVector& theta, const RealVector& xs,
    const std::function<RealVector(const RealVector& values)>& weights_of) {
  check_arity(model, theta);
  ComplexMatrix phi = forward_block(model, theta, xs);
  BatchGradient out;
  out.values = expectations(model.observable(), phi);
  const RealVector w = weights_of(out.values);
  if (w.size() != xs.size()) throw ArityError("weight vector length mismatch");
  ComplexMatrix chi = model.observable().matrix() * phi;
  for (int c = 0; c < chi.cols(); ++c) chi.col(c) *= w(c);
  out.gradient = RealVector::Zero(static_cast<Eigen::Index>(model.n_params()));
  const auto& steps = model.steps();
  for (std::size_t s = steps.size(); s-- > 0;) {
    const auto& step = steps[s];
    if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
      // d/dtheta <phi|H_L|phi> with d phi = i V phi  ->  -2 Im <H_L phi | V phi>
      const ComplexMatrix v_phi = p->generator.matrix() * phi;
      double acc = 0.0;
      for (int c = 0; c < phi.cols(); ++c) acc += chi.col(c).dot(v_phi.col(c)).imag();
      out.gradient(static_cast<Eigen::Index>(p->param_index)) = -2.0 * acc;
    }
    apply_block_inverse(step, theta, xs, phi);
    apply_block_inverse(step, theta, xs, chi);
  }
  return out;
}

RealMatrix batch_gradients(const QruModel& model, const RealVector& theta, const RealVector& xs) {
  check_arity(model, theta);
  ComplexMatrix phi = forward_block(model, theta, xs);
  ComplexMatrix chi = model.observable().matrix() * phi;
  RealMatrix out = RealMatrix::Zero(static_cast<Eigen::Index>(model.n_params()), xs.size());
  const auto& steps = model.steps();
  for (std::size_t s = steps.size(); s-- > 0;) {
    const auto& step = steps[s];
    if (const auto* p = std::get_if<ParameterizedGate>(&step.kind)) {
      const ComplexMatrix v_phi = p->generator.matrix() * phi;
      for (int c = 0; c < phi.cols(); ++c) {
        out(static_cast<Eigen::Index>(p->param_index), c) = -2.0 * chi.col(c).dot(v_phi.col(c)).imag();
      }
    }
    apply_block_inverse(step, theta, xs, phi);
    apply_block_inverse(step, theta, xs, chi);
  }
  return out;
}

ValueAndGradient value_and_gradient(const QruModel& model, const RealVector& theta, double x) {
  RealVector xs(1);
  xs(0) = x;
  auto batch = weighted_batch_gradient(model, theta, xs,
                                       [](const RealVector& v) { return RealVector::Ones(v.size()); });
  return {batch.values(0), std::move(batch.gradient)};
}

RealVector gradient(const QruModel& model, const RealVector& theta, double x) {
  return value_and_gradient(model, theta, x).gradient;
}

QruModel base_pqc(const QruModel& model) {
  std::vector<GateStep> steps;
  for (const auto& s : model.steps()) {
    if (!s.is_encoding()) steps.push_back(s);
  }
  return QruModel(model.n_qubits(), std::move(steps), model.observable(), model.initial_state());
}

LayeredView layered_view(const QruModel& model) {
  LayeredView view;
  std::vector<GateStep> block;
  for (const auto& s : model.steps()) {
    if (const auto* e = std::get_if<EncodingGate>(&s.kind)) {
      view.layers.push_back({std::move(block), e->generator});
      block.clear();
    } else {
      block.push_back(s);
    }
  }
  if (view.layers.empty()) throw NotLayeredError("model has no encoding steps");
  view.dressing = std::move(block);
  return view;
}

ComplexMatrix steps_unitary(const std::vector<GateStep>& steps, int dim, const RealVector& theta,
                            double x) {
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  RealVector xs = RealVector::Constant(dim, x);
  for (const auto& step : steps) apply_block(step, theta, xs, u);
  return u;
}

}  // namespace qru
