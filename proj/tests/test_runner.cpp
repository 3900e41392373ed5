#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qru/config.hpp"
#include "qru/errors.hpp"
#include "qru/runner.hpp"
#include "qru/training.hpp"

using namespace qru;

namespace {

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml, "t.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("qru_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kScan = R"(experiment: gradient_scan
seed: 3
model:
  family: translation_invariant
  variant: 2
sizes:
  n_qubits: [2, 3]
  L: [1, 2]
sampling:
  n_theta: 400
  n_x: 4
  batches: 10
)";

}  // namespace

TEST_CASE("generator expressions") {
  const auto e = GeneratorExpr::parse("0.5 * sum X - 0.25 * Z0 Z1 + cyclic ZZ");
  CHECK(e.max_qubit() == 1);
  const auto g = build_generator(e.expand(2), 2);
  const ComplexMatrix want = build_generator(GeneratorSpec::collective('X'), 2).matrix() * 0.5 -
                    0.25 * pauli_product_matrix({{'Z', 0}, {'Z', 1}}, 2) +
                    build_generator(GeneratorSpec::cyclic_zz(), 2).matrix();
  CHECK(max_abs_entry(g.matrix() - want) < 1e-14);
  const auto pairs = build_generator(GeneratorExpr::parse("pairs ZZ").expand(3), 3);
  CHECK(max_abs_entry(pairs.matrix() - build_generator(GeneratorSpec::all_pairs_zz(), 3).matrix()) < 1e-14);
  CHECK(GeneratorExpr::parse("1e-1 * X0").max_qubit() == 0);
  CHECK_THROWS_AS(GeneratorExpr::parse("Q0"), ConfigError);
  CHECK_THROWS_AS(GeneratorExpr::parse("0.5 *"), ConfigError);
  CHECK_THROWS_AS(GeneratorExpr::parse(""), ConfigError);
  CHECK_THROWS_AS(GeneratorExpr::parse("X3").expand(2), ValidationError);
}

TEST_CASE("config parses and echoes") {
  const auto c = parse_config(kScan, "scan.yaml");
  CHECK(c.kind == ExperimentKind::gradient_scan);
  CHECK(c.seed == 3);
  CHECK(c.n_qubits == std::vector<int>{2, 3});
  CHECK(c.layers == std::vector<int>{1, 2});
  CHECK(c.sampling.n_theta == 400);
  CHECK(c.echo["model"]["family"] == "translation_invariant");
  CHECK(c.echo["sizes"]["L"].size() == 2);
  CHECK(c.source_text == kScan);
}

TEST_CASE("config errors carry line and column") {
  const std::string unknown = "experiment: gradient_scan\nmodel:\n  family: haar\n  colour: red\n";
  const auto e1 = error_of(unknown);
  CHECK(e1.rfind("t.yaml:4:", 0) == 0);
  CHECK(e1.find("colour") != std::string::npos);

  const auto e2 = error_of("experiment: frequency_profile\nmodel:\n  family: haar\nsizes:\n  L: []\n");
  CHECK(e2.rfind("t.yaml:5:", 0) == 0);
  CHECK(e2.find("must not be empty") != std::string::npos);

  const auto e3 = error_of("experiment: gradient_scan\nmodel:\n  family: haar\n");
  CHECK(e3.rfind("t.yaml:3:", 0) == 0);

  const auto e4 = error_of("experiment: nonsense\nmodel:\n  family: haar\n");
  CHECK(e4.rfind("t.yaml:1:", 0) == 0);

  const auto e5 = error_of("experiment: frequency_profile\nmodel:\n  family: explicit\n  observable: Z3\n  steps:\n"
                           "    - encode: sum X\nsizes:\n  n_qubits: [2]\n");
  CHECK(e5.find("qubit 3") != std::string::npos);

  CHECK(error_of("experiment: [\n").rfind("t.yaml:", 0) == 0);
  CHECK(error_of("experiment: train\nmodel:\n  family: permutation_b\ntrain:\n  learning_rate: 0\n").find(
            "t.yaml:5:") == 0);
  CHECK(error_of("experiment: train\nmodel:\n  family: permutation_b\ntrain:\n  K_target: 0\n").find("t.yaml:5:") ==
        0);
}

TEST_CASE("explicit models build from steps and blocks") {
  const auto c = parse_config(R"(experiment: frequency_profile
model:
  family: explicit
  observable: Z0 Z1
  block:
    - euler: 0
    - cnot: [0, 1]
    - param: 0.5 * Z0 Z1
  encoding: 0.5 * sum X
sizes:
  n_qubits: [2]
  depth: [2]
  L: [3]
)");
  CounterRng rng(1);
  const auto inst = build_model(c.model, 2, 3, 2, rng);
  // (block^2 + encoding) x 3, then block^2; 4 parameters per block.
  CHECK(inst.model.n_encodings() == 3);
  CHECK(inst.model.n_params() == 4 * 2 * 4);
  CHECK(inst.sampler.size() == inst.model.n_params());
}

TEST_CASE("csv and json writers") {
  Table t;
  t.columns = {"a", "b,c", "d"};
  t.add({Cell(1LL), Cell(0.1), Cell(std::string("x\"y"))});
  t.add({Cell(-2LL), Cell(1.0 / 3.0), Cell(std::string("plain"))});
  const auto csv = to_csv(t);
  CHECK(csv == "a,\"b,c\",d\r\n1,0.10000000000000001,\"x\"\"y\"\r\n-2,0.33333333333333331,plain\r\n");
  const auto js = to_json(t);
  CHECK(js[1]["b,c"].get<double>() == 1.0 / 3.0);
  CHECK(js[0]["d"] == "x\"y");
  CHECK_THROWS_AS(t.add({Cell(1LL)}), Error);
}

TEST_CASE("git blob hashes") {
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("run_and_write produces artifacts deterministically") {
  auto c = parse_config(kScan, "scan.yaml");
  const auto dir1 = scratch("run1"), dir2 = scratch("run2");
  c.output_dir = dir1.string();
  c.threads = 1;
  const auto a = run_and_write(c);
  c.output_dir = dir2.string();
  c.threads = 3;
  run_and_write(c);
  for (const char* f : {"results.csv", "results.json", "manifest.json"}) CHECK(std::filesystem::exists(dir1 / f));
  const auto csv = slurp(dir1 / "results.csv");
  CHECK(csv == slurp(dir2 / "results.csv"));
  CHECK(slurp(dir1 / "results.json") == slurp(dir2 / "results.json"));
  CHECK(csv.rfind("n_qubits,depth,L,param,mean_var,", 0) == 0);
  CHECK(csv.find("\r\n") != std::string::npos);
  std::size_t params = 0;
  for (int n : {2, 3}) {
    for (int L : {1, 2}) {
      CounterRng rng(0);
      params += build_model(c.model, n, L, 1, rng).model.n_params();
    }
  }
  CHECK(a.output.table.rows.size() == params);
  const auto manifest = nlohmann::json::parse(slurp(dir1 / "manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["config_sha1"] == git_blob_sha1(kScan));
  CHECK(manifest["results_csv_sha1"] == git_blob_sha1(csv));
  CHECK(manifest["config"]["experiment"] == "gradient_scan");
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest.contains("timestamp"));
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("absorbable data leaves the gradient variance unchanged") {
  // Translation-invariant model 2: the ZZ encoding shifts into the ZZ parameter.
  auto c = parse_config(kScan, "scan.yaml");
  c.sampling.n_theta = 2000;
  const auto out = run_experiment(c);
  const auto js = to_json(out.table);
  for (const auto& row : js) {
    CHECK(std::abs(row["difference"].get<double>()) <= 4 * row["difference_se"].get<double>() + 1e-12);
  }
}

TEST_CASE("empty sweep is rejected before anything is written") {
  const auto dir = scratch("empty");
  const std::string yaml = "experiment: frequency_profile\noutput_dir: " + dir.string() +
                           "\nmodel:\n  family: haar\nsizes:\n  n_qubits: []\n";
  CHECK_THROWS_AS(parse_config(yaml), ConfigError);
  auto c = parse_config("experiment: frequency_profile\nmodel:\n  family: haar\n");
  c.n_qubits.clear();
  c.output_dir = dir.string();
  CHECK_THROWS_AS(run_and_write(c), ValidationError);
  CHECK_FALSE(std::filesystem::exists(dir));
}

TEST_CASE("runtime errors write nothing") {
  // Non-harmonic encodings cannot be profiled on one base frequency.
  const auto dir = scratch("anharmonic");
  auto c = parse_config(R"(experiment: frequency_profile
model:
  family: explicit
  steps:
    - param: sum Y
    - encode: X0 + 1.4142135623730951 * Z1
    - param: sum Y
sizes:
  n_qubits: [2]
sampling:
  n_theta: 10
)");
  c.output_dir = dir.string();
  CHECK_THROWS_AS(run_and_write(c), Error);
  CHECK_FALSE(std::filesystem::exists(dir));
}

TEST_CASE("haar frequency profile variance grows as (n/4) L") {
  auto c = parse_config(R"(experiment: frequency_profile
seed: 4
model:
  family: haar
sizes:
  n_qubits: [2, 3]
  L: [2, 6]
sampling:
  n_theta: 300
  batches: 10
)");
  const auto out = run_experiment(c);
  for (const auto& p : out.summary["points"]) {
    const double want = p["n_qubits"].get<int>() / 4.0 * p["L"].get<int>();
    CHECK(p["predicted_variance"].get<double>() == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs(p["fitted_variance"].get<double>() - want) <= 4 * p["fitted_variance_se"].get<double>());
  }
  // Mean weights sum to one at every sweep point.
  std::map<std::pair<long long, long long>, double> total;
  for (const auto& row : out.table.rows) {
    total[{std::get<long long>(row[0]), std::get<long long>(row[2])}] += std::get<double>(row[5]);
  }
  for (const auto& [key, s] : total) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("training helpers") {
  const RealVector xs = uniform_grid(64);
  CHECK(xs(0) == 0.0);
  CHECK(xs(32) == doctest::Approx(M_PI));
  const RealVector y = step_target(3, xs);
  CHECK(y(0) == doctest::Approx(1.0));
  const RealVector a = grid_fourier_abs(y, 6);
  for (int k = 0; k <= 3; ++k) CHECK(a(k) == doctest::Approx(1.0 / 7.0));
  for (int k = 4; k <= 6; ++k) CHECK(a(k) < 1e-14);
  CHECK_THROWS_AS(step_target(0, xs), ValidationError);
  CHECK_THROWS_AS(uniform_grid(0), ValidationError);
}

TEST_CASE("training fits a realizable target") {
  AnsatzSpec spec;
  spec.family = AnsatzFamily::permutation_b;
  spec.n_qubits = 2;
  spec.layers = 1;
  CounterRng rng(13);
  const auto inst = build_ansatz(spec, rng);
  const RealVector xs = uniform_grid(64);
  CounterRng star(99);
  const RealVector target = hypothesis_batch(inst.model, inst.sampler.sample(star), xs);
  const auto r = train(inst.model, inst.sampler, target, {}, 5, 8);
  CHECK(r.loss.size() == 2001);
  CHECK(r.loss.front() > 1e-3);
  CHECK(r.loss.back() <= 1e-4);
  for (int k = 0; k <= 8; ++k) CHECK(std::abs(r.fitted_abs(k) - r.target_abs(k)) < 1e-2);

  TrainOptions bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train(inst.model, inst.sampler, target, bad, 1, 8), ValidationError);
  CHECK_THROWS_AS(train(inst.model, inst.sampler, target, {}, 1, 32), ValidationError);
  CHECK_THROWS_AS(train(inst.model, ThetaSampler(1), target, {}, 1, 8), ArityError);
}

TEST_CASE("training aborts on divergence") {
  AnsatzSpec spec;
  spec.family = AnsatzFamily::permutation_b;
  spec.n_qubits = 2;
  spec.layers = 2;
  CounterRng rng(1);
  const auto inst = build_ansatz(spec, rng);
  const RealVector xs = uniform_grid(64);
  // Start on the target: the initial loss is ~0, so any drift exceeds 10x.
  CounterRng init(7);
  const RealVector target = hypothesis_batch(inst.model, inst.sampler.sample(init), xs).array() + 1e-3;
  TrainOptions opt;
  opt.learning_rate = 50.0;
  opt.iterations = 500;
  CHECK_THROWS_AS(train(inst.model, inst.sampler, target, opt, 7, 8), DivergenceError);
}
