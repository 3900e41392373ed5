#include "qru/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "qru/errors.hpp"

namespace qru {

namespace {

using nlohmann::ordered_json;

class Reader {
 public:
  explicit Reader(std::string name) : name_(std::move(name)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto m = node.Mark();
    if (m.line < 0) throw ConfigError(name_ + ": " + msg);
    throw ConfigError(name_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": " + msg);
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) const {
    require_map(node, where);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(kv.first, "unknown key '" + key + "' in " + where + " (expected one of: " + list + ")");
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& key, const char* type) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be " + type);
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' must be " + type + ", got '" + node.Scalar() + "'");
    }
  }

  long long integer(const YAML::Node& node, const std::string& key, long long min) const {
    const auto v = scalar<long long>(node, key, "an integer");
    if (v < min) fail(node, "'" + key + "' must be at least " + std::to_string(min));
    return v;
  }

  double real(const YAML::Node& node, const std::string& key) const {
    const double v = scalar<double>(node, key, "a number");
    if (!std::isfinite(v)) fail(node, "'" + key + "' must be finite");
    return v;
  }

  std::vector<int> int_list(const YAML::Node& node, const std::string& key, int min) const {
    std::vector<int> out;
    if (node.IsScalar()) {
      out.push_back(static_cast<int>(integer(node, key, min)));
      return out;
    }
    if (!node.IsSequence()) fail(node, "'" + key + "' must be an integer or a list of integers");
    if (node.size() == 0) fail(node, "'" + key + "' must not be empty");
    for (const auto& item : node) out.push_back(static_cast<int>(integer(item, key, min)));
    return out;
  }

  GeneratorExpr generator(const YAML::Node& node, const std::string& key) const {
    const auto text = scalar<std::string>(node, key, "a generator expression");
    try {
      return GeneratorExpr::parse(text);
    } catch (const ConfigError& e) {
      fail(node, "'" + key + "': " + e.what());
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

std::optional<ExperimentKind> parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::gradient_scan, ExperimentKind::frequency_profile, ExperimentKind::variance_scaling,
                 ExperimentKind::lipschitz_cdf, ExperimentKind::witness_audit, ExperimentKind::train}) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

StepConfig parse_step(const Reader& r, const YAML::Node& node) {
  r.require_map(node, "a step");
  StepConfig s;
  s.line = node.Mark().line + 1;
  if (node["param"]) {
    r.check_keys(node, "param step", {"param", "init"});
    s.kind = StepConfig::Kind::param;
    s.generator = r.generator(node["param"], "param");
    if (node["init"]) {
      const auto init = r.scalar<std::string>(node["init"], "init", "a string");
      if (init == "uniform") s.init = ThetaKind::uniform;
      else if (init == "haar_polar") s.init = ThetaKind::haar_polar;
      else r.fail(node["init"], "'init' must be uniform or haar_polar");
    }
  } else if (node["encode"]) {
    r.check_keys(node, "encode step", {"encode"});
    s.kind = StepConfig::Kind::encode;
    s.generator = r.generator(node["encode"], "encode");
  } else if (node["fixed"]) {
    r.check_keys(node, "fixed step", {"fixed", "angle"});
    s.kind = StepConfig::Kind::fixed;
    s.generator = r.generator(node["fixed"], "fixed");
    if (!node["angle"]) r.fail(node, "fixed step needs an 'angle'");
    s.angle = r.real(node["angle"], "angle");
  } else if (node["euler"]) {
    r.check_keys(node, "euler step", {"euler"});
    s.kind = StepConfig::Kind::euler;
    s.qubit = static_cast<int>(r.integer(node["euler"], "euler", 0));
  } else if (node["cnot"]) {
    r.check_keys(node, "cnot step", {"cnot"});
    s.kind = StepConfig::Kind::cnot;
    const auto pair = node["cnot"];
    if (!pair.IsSequence() || pair.size() != 2) r.fail(pair, "'cnot' must be [control, target]");
    s.control = static_cast<int>(r.integer(pair[0], "cnot", 0));
    s.target = static_cast<int>(r.integer(pair[1], "cnot", 0));
    if (s.control == s.target) r.fail(pair, "cnot control and target must differ");
  } else if (node["haar"]) {
    r.check_keys(node, "haar step", {"haar"});
    s.kind = StepConfig::Kind::haar;
    if (!r.scalar<bool>(node["haar"], "haar", "true or false")) r.fail(node["haar"], "'haar' step must be true");
  } else {
    r.fail(node, "step must have one of: param, encode, fixed, euler, cnot, haar");
  }
  return s;
}

std::vector<StepConfig> parse_steps(const Reader& r, const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() == 0) r.fail(node, "'" + key + "' must be a non-empty list of steps");
  std::vector<StepConfig> out;
  for (const auto& item : node) out.push_back(parse_step(r, item));
  return out;
}

ordered_json step_echo(const StepConfig& s) {
  switch (s.kind) {
    case StepConfig::Kind::param:
      return {{"param", s.generator->text()}, {"init", s.init == ThetaKind::uniform ? "uniform" : "haar_polar"}};
    case StepConfig::Kind::encode: return {{"encode", s.generator->text()}};
    case StepConfig::Kind::fixed: return {{"fixed", s.generator->text()}, {"angle", s.angle}};
    case StepConfig::Kind::euler: return {{"euler", s.qubit}};
    case StepConfig::Kind::cnot: return {{"cnot", {s.control, s.target}}};
    case StepConfig::Kind::haar: return {{"haar", true}};
  }
  return {};
}

int max_step_qubit(const StepConfig& s) {
  switch (s.kind) {
    case StepConfig::Kind::euler: return s.qubit;
    case StepConfig::Kind::cnot: return std::max(s.control, s.target);
    case StepConfig::Kind::haar: return -1;
    default: return s.generator->max_qubit();
  }
}

}  // namespace

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::gradient_scan: return "gradient_scan";
    case ExperimentKind::frequency_profile: return "frequency_profile";
    case ExperimentKind::variance_scaling: return "variance_scaling";
    case ExperimentKind::lipschitz_cdf: return "lipschitz_cdf";
    case ExperimentKind::witness_audit: return "witness_audit";
    case ExperimentKind::train: return "train";
  }
  return "?";
}

GeneratorExpr GeneratorExpr::parse(const std::string& text) {
  GeneratorExpr e;
  e.text_ = text;
  std::istringstream in(text);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) {
    // Split glued operators such as "0.5*X0" or "X0+Z1".
    std::string cur;
    for (char c : t) {
      const bool exponent = !cur.empty() && (cur.back() == 'e' || cur.back() == 'E') &&
                            std::isdigit(static_cast<unsigned char>(cur.front()));
      if (c == '*' || ((c == '+' || c == '-') && !exponent)) {
        if (!cur.empty()) tokens.push_back(cur);
        tokens.emplace_back(1, c);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }
  if (tokens.empty()) throw ConfigError("empty generator expression");

  auto is_pauli = [](const std::string& t) {
    if (t.size() < 2 || std::string("XYZ").find(t[0]) == std::string::npos) return false;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
  };

  std::size_t i = 0;
  double sign = 1.0;
  bool expect_term = true;
  while (i < tokens.size()) {
    const std::string& t = tokens[i];
    if (!expect_term) {
      if (t != "+" && t != "-") throw ConfigError("expected '+' or '-' before '" + t + "' in '" + text + "'");
      sign = t == "-" ? -1.0 : 1.0;
      expect_term = true;
      ++i;
      continue;
    }
    if (t == "-" || t == "+") {
      if (t == "-") sign = -sign;
      ++i;
      continue;
    }
    Term term;
    term.coeff = sign;
    sign = 1.0;
    std::size_t used = 0;
    const double c = std::strtod(t.c_str(), nullptr);
    char* end = nullptr;
    std::strtod(t.c_str(), &end);
    if (end && *end == '\0') {
      term.coeff *= c;
      ++i;
      if (i < tokens.size() && tokens[i] == "*") ++i;
      if (i >= tokens.size()) throw ConfigError("coefficient without an operator in '" + text + "'");
    }
    const std::string& head = tokens[i];
    if (head == "sum") {
      if (i + 1 >= tokens.size() || tokens[i + 1].size() != 1 || std::string("XYZ").find(tokens[i + 1][0]) == std::string::npos) {
        throw ConfigError("'sum' must be followed by X, Y or Z in '" + text + "'");
      }
      term.kind = Term::Kind::sum;
      term.pauli = tokens[i + 1][0];
      used = 2;
    } else if (head == "cyclic" || head == "pairs") {
      if (i + 1 >= tokens.size() || tokens[i + 1] != "ZZ") throw ConfigError("'" + head + "' must be followed by ZZ");
      term.kind = head == "cyclic" ? Term::Kind::cyclic_zz : Term::Kind::pairs_zz;
      used = 2;
    } else if (head == "I") {
      term.kind = Term::Kind::product;
      used = 1;
    } else if (is_pauli(head)) {
      term.kind = Term::Kind::product;
      while (i + used < tokens.size() && is_pauli(tokens[i + used])) {
        const auto& p = tokens[i + used];
        const int q = std::stoi(p.substr(1));
        for (const auto& [pc, pq] : term.ops) {
          if (pq == q) throw ConfigError("qubit " + std::to_string(q) + " appears twice in one product in '" + text + "'");
        }
        term.ops.emplace_back(p[0], q);
        e.max_qubit_ = std::max(e.max_qubit_, q);
        ++used;
      }
    } else {
      throw ConfigError("unrecognized token '" + head + "' in '" + text + "'");
    }
    i += used;
    e.terms_.push_back(term);
    expect_term = false;
  }
  if (expect_term) throw ConfigError("dangling operator in '" + text + "'");
  return e;
}

GeneratorSpec GeneratorExpr::expand(int n) const {
  if (max_qubit_ >= n) {
    throw ValidationError("generator '" + text_ + "' uses qubit " + std::to_string(max_qubit_) + " but the model has " +
                          std::to_string(n) + " qubits");
  }
  GeneratorSpec spec;
  spec.kind = GeneratorSpec::Kind::pauli_sum;
  spec.label = text_;
  for (const auto& t : terms_) {
    switch (t.kind) {
      case Term::Kind::product: spec.terms.push_back({t.coeff, t.ops}); break;
      case Term::Kind::sum:
        for (int q = 0; q < n; ++q) spec.terms.push_back({t.coeff, {{t.pauli, q}}});
        break;
      case Term::Kind::cyclic_zz:
        for (int q = 0; q < n; ++q) {
          const int next = (q + 1) % n;
          if (next == q) spec.terms.push_back({t.coeff, {}});
          else spec.terms.push_back({t.coeff, {{'Z', q}, {'Z', next}}});
        }
        break;
      case Term::Kind::pairs_zz:
        for (int q = 0; q < n; ++q) {
          for (int r = q + 1; r < n; ++r) spec.terms.push_back({t.coeff, {{'Z', q}, {'Z', r}}});
        }
        break;
    }
  }
  return spec;
}

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  const Reader r(name);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(name + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": YAML syntax error: " + e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(name + ": empty config");
  r.check_keys(root, "the top level",
               {"experiment", "seed", "threads", "output_dir", "model", "sizes", "sampling", "lipschitz", "train"});

  ExperimentConfig c;
  c.source_text = text;
  c.source_name = name;
  if (!root["experiment"]) r.fail(root, "missing required key 'experiment'");
  {
    const auto s = r.scalar<std::string>(root["experiment"], "experiment", "a string");
    const auto k = parse_kind(s);
    if (!k) {
      r.fail(root["experiment"], "unknown experiment '" + s +
                                     "' (expected gradient_scan, frequency_profile, variance_scaling, lipschitz_cdf, "
                                     "witness_audit or train)");
    }
    c.kind = *k;
  }
  if (root["seed"]) c.seed = r.scalar<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
  if (root["threads"]) c.threads = static_cast<int>(r.integer(root["threads"], "threads", 1));
  if (root["output_dir"]) c.output_dir = r.scalar<std::string>(root["output_dir"], "output_dir", "a path");

  // model
  if (!root["model"]) r.fail(root, "missing required key 'model'");
  const auto model = root["model"];
  r.check_keys(model, "model", {"family", "variant", "entangling", "final_block", "observable", "steps", "block", "encoding"});
  if (!model["family"]) r.fail(model, "model needs a 'family'");
  const auto fam = r.scalar<std::string>(model["family"], "family", "a string");
  if (fam != "explicit") {
    c.model.family = parse_family(fam);
    if (!c.model.family) {
      r.fail(model["family"], "unknown ansatz family '" + fam +
                                  "' (expected alternating_layered, translation_invariant, permutation_a, "
                                  "permutation_b, haar or explicit)");
    }
  }
  if (model["variant"]) {
    c.model.variant = static_cast<int>(r.integer(model["variant"], "variant", 1));
    if (c.model.variant > 3) r.fail(model["variant"], "'variant' must be 1, 2 or 3");
  }
  if (model["entangling"]) c.model.entangling = r.scalar<bool>(model["entangling"], "entangling", "true or false");
  if (model["final_block"]) c.model.final_block = r.scalar<bool>(model["final_block"], "final_block", "true or false");
  if (model["observable"]) c.model.observable = r.generator(model["observable"], "observable");
  if (c.model.family) {
    for (const char* key : {"steps", "block", "encoding"}) {
      if (model[key]) r.fail(model[key], std::string("'") + key + "' is only valid for the explicit family");
    }
  } else {
    if (model["steps"] && (model["block"] || model["encoding"])) {
      r.fail(model["steps"], "use either 'steps' or 'block' + 'encoding', not both");
    }
    if (model["steps"]) {
      c.model.steps = parse_steps(r, model["steps"], "steps");
    } else {
      if (!model["block"] || !model["encoding"]) r.fail(model, "explicit models need 'steps' or 'block' + 'encoding'");
      c.model.block = parse_steps(r, model["block"], "block");
      c.model.encoding = r.generator(model["encoding"], "encoding");
    }
  }

  // sizes
  if (root["sizes"]) {
    const auto sizes = root["sizes"];
    r.check_keys(sizes, "sizes", {"n_qubits", "depth", "L"});
    if (sizes["n_qubits"]) c.n_qubits = r.int_list(sizes["n_qubits"], "n_qubits", 1);
    if (sizes["depth"]) c.depth = r.int_list(sizes["depth"], "depth", 1);
    if (sizes["L"]) c.layers = r.int_list(sizes["L"], "L", 1);
    if (!c.model.steps.empty()) {
      for (const char* key : {"depth", "L"}) {
        if (sizes[key]) r.fail(sizes[key], std::string("'") + key + "' has no meaning for an explicit 'steps' list");
      }
    }
    for (const auto& q : sizes["n_qubits"] ? sizes["n_qubits"] : YAML::Node()) {
      if (q.IsScalar() && q.as<int>() > 10) r.fail(q, "n_qubits above 10 is not supported by the dense simulator");
    }
  }
  int max_named = -1;
  for (const auto* list : {&c.model.steps, &c.model.block}) {
    for (const auto& s : *list) max_named = std::max(max_named, max_step_qubit(s));
  }
  if (c.model.encoding) max_named = std::max(max_named, c.model.encoding->max_qubit());
  if (c.model.observable) max_named = std::max(max_named, c.model.observable->max_qubit());
  for (int n : c.n_qubits) {
    if (max_named >= n) {
      r.fail(root["sizes"] ? root["sizes"] : root,
             "model names qubit " + std::to_string(max_named) + " but n_qubits includes " + std::to_string(n));
    }
  }

  // sampling
  if (root["sampling"]) {
    const auto s = root["sampling"];
    r.check_keys(s, "sampling", {"n_theta", "n_x", "batches", "data"});
    if (s["n_theta"]) c.sampling.n_theta = static_cast<int>(r.integer(s["n_theta"], "n_theta", 1));
    if (s["n_x"]) c.sampling.n_x = static_cast<int>(r.integer(s["n_x"], "n_x", 1));
    if (s["batches"]) c.sampling.batches = static_cast<int>(r.integer(s["batches"], "batches", 1));
    if (s["data"]) {
      const auto d = s["data"];
      r.require_map(d, "data");
      if (!d["distribution"]) r.fail(d, "data needs a 'distribution'");
      const auto dist = r.scalar<std::string>(d["distribution"], "distribution", "a string");
      if (dist == "uniform") {
        r.check_keys(d, "uniform data", {"distribution", "low", "high"});
        const double lo = d["low"] ? r.real(d["low"], "low") : -M_PI;
        const double hi = d["high"] ? r.real(d["high"], "high") : M_PI;
        if (!(hi > lo)) r.fail(d, "'high' must exceed 'low'");
        c.sampling.data = DataSampler::uniform(lo, hi);
      } else if (dist == "gaussian") {
        r.check_keys(d, "gaussian data", {"distribution", "mean", "stddev"});
        const double mean = d["mean"] ? r.real(d["mean"], "mean") : 0.0;
        const double sd = d["stddev"] ? r.real(d["stddev"], "stddev") : 1.0;
        if (!(sd > 0)) r.fail(d["stddev"] ? d["stddev"] : d, "'stddev' must be positive");
        c.sampling.data = DataSampler::gaussian(mean, sd);
      } else if (dist == "dataset") {
        r.check_keys(d, "dataset data", {"distribution", "values"});
        if (!d["values"] || !d["values"].IsSequence() || d["values"].size() == 0) {
          r.fail(d["values"] ? d["values"] : d, "dataset needs a non-empty 'values' list");
        }
        std::vector<double> v;
        for (const auto& x : d["values"]) v.push_back(r.real(x, "values"));
        c.sampling.data = DataSampler::dataset(std::move(v));
      } else {
        r.fail(d["distribution"], "unknown distribution '" + dist + "' (expected uniform, gaussian or dataset)");
      }
    }
  }

  if (root["lipschitz"]) {
    const auto l = root["lipschitz"];
    r.check_keys(l, "lipschitz", {"grid_points", "t_points"});
    if (l["grid_points"]) c.lipschitz.grid_points = static_cast<int>(r.integer(l["grid_points"], "grid_points", 0));
    if (l["t_points"]) c.lipschitz.t_points = static_cast<int>(r.integer(l["t_points"], "t_points", 2));
  }

  if (root["train"]) {
    const auto t = root["train"];
    r.check_keys(t, "train", {"target", "K_target", "grid", "learning_rate", "iterations", "max_k"});
    if (t["target"]) {
      const auto s = r.scalar<std::string>(t["target"], "target", "a string");
      if (s == "step") c.train.target = TrainConfig::Target::step;
      else if (s == "self") c.train.target = TrainConfig::Target::self;
      else r.fail(t["target"], "'target' must be step or self");
    }
    if (t["K_target"]) c.train.K_target = static_cast<int>(r.integer(t["K_target"], "K_target", 1));
    if (t["grid"]) c.train.grid = static_cast<int>(r.integer(t["grid"], "grid", 4));
    if (t["learning_rate"]) {
      c.train.learning_rate = r.real(t["learning_rate"], "learning_rate");
      if (!(c.train.learning_rate > 0)) r.fail(t["learning_rate"], "'learning_rate' must be positive");
    }
    if (t["iterations"]) c.train.iterations = static_cast<int>(r.integer(t["iterations"], "iterations", 1));
    if (t["max_k"]) c.train.max_k = static_cast<int>(r.integer(t["max_k"], "max_k", 0));
    const int max_k = c.train.max_k.value_or(2 * c.train.K_target + 10);
    if (2 * max_k >= c.train.grid) {
      r.fail(t, "grid of " + std::to_string(c.train.grid) + " points cannot resolve |a_k| up to k = " +
                    std::to_string(max_k) + "; raise 'grid' or lower 'max_k'");
    }
  } else if (c.kind == ExperimentKind::train) {
    r.fail(root, "train experiments need a 'train' section");
  }

  // Experiment-specific checks.
  const bool haar = c.model.family == AnsatzFamily::haar;
  if (haar && (c.kind == ExperimentKind::gradient_scan || c.kind == ExperimentKind::witness_audit ||
               c.kind == ExperimentKind::train)) {
    r.fail(model["family"], "the haar family has no trainable parameters, so " + kind_name(c.kind) + " cannot use it");
  }
  if (c.kind == ExperimentKind::witness_audit) {
    for (int n : c.n_qubits) {
      if (n > 5) r.fail(root["sizes"]["n_qubits"], "witness_audit supports at most 5 qubits");
    }
  }
  if (c.kind == ExperimentKind::lipschitz_cdf && c.sampling.n_theta < 100) {
    r.fail(root["sampling"]["n_theta"], "lipschitz_cdf needs n_theta >= 100 samples");
  }
  if ((c.kind == ExperimentKind::gradient_scan || c.kind == ExperimentKind::witness_audit) && c.sampling.n_theta < 2) {
    r.fail(root["sampling"]["n_theta"], kind_name(c.kind) + " needs n_theta >= 2");
  }

  // Normalized echo.
  ordered_json m;
  m["family"] = c.model.family ? family_name(*c.model.family) : "explicit";
  if (c.model.family == AnsatzFamily::translation_invariant) m["variant"] = c.model.variant;
  if (c.model.family == AnsatzFamily::alternating_layered) m["entangling"] = c.model.entangling;
  if (c.model.family == AnsatzFamily::permutation_a || c.model.family == AnsatzFamily::permutation_b) {
    m["final_block"] = c.model.final_block;
  }
  if (c.model.observable) m["observable"] = c.model.observable->text();
  if (!c.model.steps.empty()) {
    m["steps"] = ordered_json::array();
    for (const auto& s : c.model.steps) m["steps"].push_back(step_echo(s));
  }
  if (!c.model.block.empty()) {
    m["block"] = ordered_json::array();
    for (const auto& s : c.model.block) m["block"].push_back(step_echo(s));
    m["encoding"] = c.model.encoding->text();
  }
  ordered_json e;
  e["experiment"] = kind_name(c.kind);
  e["seed"] = c.seed;
  e["threads"] = c.threads;
  e["output_dir"] = c.output_dir;
  e["model"] = m;
  e["sizes"] = {{"n_qubits", c.n_qubits}, {"depth", c.depth}, {"L", c.layers}};
  e["sampling"] = {{"n_theta", c.sampling.n_theta},
                   {"n_x", c.sampling.n_x},
                   {"batches", c.sampling.batches},
                   {"data", c.sampling.data.describe()}};
  e["lipschitz"] = {{"grid_points", c.lipschitz.grid_points}, {"t_points", c.lipschitz.t_points}};
  e["train"] = {{"target", c.train.target == TrainConfig::Target::step ? "step" : "self"},
                {"K_target", c.train.K_target},
                {"grid", c.train.grid},
                {"learning_rate", c.train.learning_rate},
                {"iterations", c.train.iterations},
                {"max_k", c.train.max_k.value_or(2 * c.train.K_target + 10)}};
  c.echo = std::move(e);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

ModelInstance build_model(const ModelConfig& m, int n, int layers, int depth, CounterRng& rng) {
  if (m.family) {
    AnsatzSpec spec;
    spec.family = *m.family;
    spec.n_qubits = n;
    spec.layers = layers;
    spec.depth = depth;
    spec.variant = m.variant;
    spec.entangling = m.entangling;
    spec.final_block = m.final_block;
    if (m.observable) spec.observable = m.observable->expand(n);
    auto inst = build_ansatz(spec, rng);
    return {std::move(inst.model), std::move(inst.sampler)};
  }
  ModelBuilder b(n);
  std::vector<ThetaKind> kinds;
  auto emit = [&](const StepConfig& s) {
    switch (s.kind) {
      case StepConfig::Kind::param:
        b.param(s.generator->expand(n));
        kinds.push_back(s.init);
        break;
      case StepConfig::Kind::encode: b.encode(s.generator->expand(n)); break;
      case StepConfig::Kind::fixed:
        b.fixed(expm_i(build_generator(s.generator->expand(n), n), s.angle), s.generator->text());
        break;
      case StepConfig::Kind::euler: {
        const std::size_t polar = add_euler_block(b, s.qubit);
        kinds.resize(b.n_params(), ThetaKind::uniform);
        kinds[polar] = ThetaKind::haar_polar;
        break;
      }
      case StepConfig::Kind::cnot: b.fixed(cnot_matrix(s.control, s.target, n), "cnot"); break;
      case StepConfig::Kind::haar: b.fixed(haar_unitary(1 << n, rng), "haar"); break;
    }
  };
  if (!m.steps.empty()) {
    for (const auto& s : m.steps) emit(s);
  } else {
    const auto enc = m.encoding->expand(n);
    for (int l = 0; l < layers; ++l) {
      for (int r = 0; r < depth; ++r) {
        for (const auto& s : m.block) emit(s);
      }
      b.encode(enc);
    }
    if (m.final_block) {
      for (int r = 0; r < depth; ++r) {
        for (const auto& s : m.block) emit(s);
      }
    }
  }
  b.observable(m.observable ? m.observable->expand(n) : GeneratorSpec::pauli_string("Z0"));
  return {b.build(), ThetaSampler(std::move(kinds))};
}

}  // namespace qru
