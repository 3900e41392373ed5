#pragma once

// Experiment execution and artifact output (results.csv, results.json,
// manifest.json).

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "qru/config.hpp"

namespace qru {

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

struct ExperimentOutput {
  Table table;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

/// Runs the experiment in memory. Sweep points run on `config.threads`
/// workers; every point has its own seed, so results do not depend on the
/// thread count.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// RFC 4180: header row, CRLF line ends, doubles as %.17g.
std::string to_csv(const Table& table);
nlohmann::ordered_json to_json(const Table& table);

/// Hex SHA-1 of "blob <size>\0" + content, as git hashes file contents.
std::string git_blob_sha1(const std::string& content);

struct RunArtifacts {
  std::string output_dir;
  double wall_seconds = 0.0;
  ExperimentOutput output;
};

/// run_experiment followed by writing the three artifact files into
/// config.output_dir (created if needed). Nothing is written on failure.
RunArtifacts run_and_write(const ExperimentConfig& config);

}  // namespace qru
