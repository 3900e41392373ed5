// Prints one PASS/FAIL line per acceptance criterion. Exit status is 0 when
// every criterion was evaluated; failures are reported, not hidden.
// --strict makes any FAIL a non-zero exit.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qru/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  qru::AcceptanceOptions opt;
  std::vector<std::string> only;
  bool verbose = false, strict = false;
  app.add_option("--seed", opt.seed, "Base seed");
  app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Criterion numbers or names");
  app.add_flag("-v,--verbose", verbose, "Print per-item details");
  app.add_flag("--strict", strict, "Exit 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> ids;
  for (const auto& key : only) {
    const int id = qru::find_criterion(key);
    if (id == 0) {
      std::fprintf(stderr, "unknown criterion '%s'\n", key.c_str());
      return 1;
    }
    ids.push_back(id);
  }
  if (ids.empty()) {
    for (const auto& c : qru::criteria()) ids.push_back(c.id);
  }
  int failed = 0, errors = 0;
  for (int id : ids) {
    try {
      const auto r = qru::run_criterion(id, opt);
      if (verbose) {
        for (const auto& line : r.details) std::printf("    %s\n", line.c_str());
      }
      std::printf("%s %2d %-26s %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.summary.c_str(),
                  r.seconds);
      failed += !r.pass;
    } catch (const std::exception& e) {
      std::printf("FAIL %2d error: %s\n", id, e.what());
      ++errors;
    }
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", ids.size(), failed + errors);
  if (errors) return 2;
  return strict && failed ? 1 : 0;
}
