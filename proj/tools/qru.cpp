// qru: run, validate and oracle subcommands.
//
// Exit codes: 0 ok, 1 configuration error (or unknown oracle case),
// 2 runtime error (or a failing oracle).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qru/acceptance.hpp"
#include "qru/config.hpp"
#include "qru/errors.hpp"
#include "qru/runner.hpp"

namespace {

constexpr int kOk = 0, kConfigError = 1, kRuntimeError = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

qru::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto c = qru::load_config(path);
  if (o.seed) c.echo["seed"] = c.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw qru::ConfigError("--threads must be at least 1");
    c.echo["threads"] = c.threads = *o.threads;
  }
  if (o.out_dir) c.echo["output_dir"] = c.output_dir = *o.out_dir;
  return c;
}

int run(const std::string& path, const Overrides& o) {
  const auto c = load(path, o);
  const auto a = qru::run_and_write(c);
  std::printf("%s: %zu rows written to %s (%.2f s)\n", qru::kind_name(c.kind).c_str(), a.output.table.rows.size(),
              a.output_dir.c_str(), a.wall_seconds);
  return kOk;
}

int validate(const std::string& path, const Overrides& o) {
  const auto c = load(path, o);
  std::printf("%s: ok\n%s\n", path.c_str(), c.echo.dump(2).c_str());
  return kOk;
}

int oracle(const std::string& name, const Overrides& o, bool verbose) {
  if (name == "list") {
    for (const auto& c : qru::criteria()) std::printf("%2d  %s\n", c.id, c.name);
    return kOk;
  }
  const int id = qru::find_criterion(name);
  if (id == 0) {
    std::fprintf(stderr, "unknown oracle case '%s' (try 'oracle list')\n", name.c_str());
    return kConfigError;
  }
  qru::AcceptanceOptions opt;
  if (o.seed) opt.seed = *o.seed;
  if (o.threads) opt.threads = *o.threads;
  const auto r = qru::run_criterion(id, opt);
  if (verbose) {
    for (const auto& line : r.details) std::printf("  %s\n", line.c_str());
  }
  std::printf("%s %d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.summary.c_str(), r.seconds);
  return r.pass ? kOk : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Re-uploading circuit experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override the seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir, "Output directory for run");

  std::string path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write results.csv, results.json, manifest.json");
  run_cmd->add_option("config", path, "Config file (YAML)")->required();
  auto* validate_cmd = app.add_subcommand("validate", "Check a config file and print its normalized form");
  validate_cmd->add_option("config", path, "Config file (YAML)")->required();
  std::string case_name;
  bool quiet = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "Run one acceptance oracle ('list' shows the cases)");
  oracle_cmd->add_option("case", case_name, "Case name or number")->required();
  oracle_cmd->add_flag("-q,--quiet", quiet, "Only print the verdict line");
  for (auto* sub : {run_cmd, validate_cmd, oracle_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  if (*seed_opt) o.seed = seed;
  if (*threads_opt) o.threads = threads;
  if (*out_opt) o.out_dir = out_dir;

  try {
    if (*run_cmd) return run(path, o);
    if (*validate_cmd) return validate(path, o);
    return oracle(case_name, o, !quiet);
  } catch (const qru::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}
