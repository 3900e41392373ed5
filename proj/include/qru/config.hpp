#pragma once

// Experiment configuration: YAML documents parsed into validated structs.
// Every validation error carries the file name, line and column of the
// offending node.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qru/ansatz.hpp"
#include "qru/errors.hpp"
#include "qru/sampling.hpp"

namespace qru {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class ExperimentKind { gradient_scan, frequency_profile, variance_scaling, lipschitz_cdf, witness_audit, train };

std::string kind_name(ExperimentKind k);

/// Sums of Pauli products, collective and pair terms, e.g.
/// "0.5 * sum X", "Z0 Z1 - 0.25 * Z1", "cyclic ZZ", "pairs ZZ".
class GeneratorExpr {
 public:
  /// Throws ConfigError (without a location) on malformed text.
  static GeneratorExpr parse(const std::string& text);
  GeneratorSpec expand(int n_qubits) const;
  const std::string& text() const noexcept { return text_; }
  /// Largest qubit index named explicitly, or -1.
  int max_qubit() const noexcept { return max_qubit_; }

 private:
  struct Term {
    double coeff = 1.0;
    enum class Kind { product, sum, cyclic_zz, pairs_zz } kind = Kind::product;
    std::vector<std::pair<char, int>> ops;
    char pauli = 'X';
  };
  std::string text_;
  std::vector<Term> terms_;
  int max_qubit_ = -1;
};

struct StepConfig {
  enum class Kind { param, encode, fixed, euler, cnot, haar } kind = Kind::param;
  std::optional<GeneratorExpr> generator;
  double angle = 0.0;              // fixed
  ThetaKind init = ThetaKind::uniform;  // param
  int qubit = 0;                   // euler
  int control = 0, target = 1;     // cnot
  int line = 0;
};

struct ModelConfig {
  /// nullopt for explicit step lists.
  std::optional<AnsatzFamily> family;
  int variant = 1;
  bool entangling = false;
  bool final_block = true;
  std::optional<GeneratorExpr> observable;
  /// Explicit models: `steps` verbatim, or `block`^depth + encoding per layer.
  std::vector<StepConfig> steps;
  std::vector<StepConfig> block;
  std::optional<GeneratorExpr> encoding;
};

struct SamplingConfig {
  int n_theta = 1000;
  int n_x = 20;
  int batches = 20;
  DataSampler data = DataSampler::uniform(-M_PI, M_PI);
};

struct LipschitzConfig {
  /// 0 picks 8 * max_index + 16 per sample.
  int grid_points = 0;
  int t_points = 64;
};

struct TrainConfig {
  enum class Target { step, self } target = Target::step;
  int K_target = 4;
  int grid = 256;
  double learning_rate = 0.05;
  int iterations = 2000;
  /// Length of the |a_k| table; defaults to 2 * K_target + 10.
  std::optional<int> max_k;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::gradient_scan;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = "results";
  ModelConfig model;
  std::vector<int> n_qubits{2};
  std::vector<int> depth{1};
  std::vector<int> layers{1};
  SamplingConfig sampling;
  LipschitzConfig lipschitz;
  TrainConfig train;
  /// Normalized echo of the document and its raw text.
  nlohmann::ordered_json echo;
  std::string source_text;
  std::string source_name;
};

/// Parses and validates. `name` is used in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& name = "<config>");
ExperimentConfig load_config(const std::string& path);

struct ModelInstance {
  QruModel model;
  ThetaSampler sampler;
};

/// Builds the model of one sweep point; Haar blocks are drawn from `rng`.
ModelInstance build_model(const ModelConfig& m, int n_qubits, int layers, int depth, CounterRng& rng);

}  // namespace qru
