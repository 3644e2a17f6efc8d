#pragma once

// Subcommand bodies for the contention tool. Each one turns an
// ExperimentConfig into file contents; main() owns argument parsing and
// where the bytes go.

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "contention/channel.hpp"

namespace contention::cli {

struct ExperimentConfig {
  std::string command;
  int n_users = 2;
  /// iid | constant | correlated | chain-<k>
  std::string channel = "iid";
  double channel_epsilon = 1e-6;
  std::string strategy = "osa";
  std::uint64_t slots = 1'000'000;
  int max_minislots = 64;
  std::uint64_t seed = 42;
  double epsilon = 1e-10;
  std::size_t max_entries = std::size_t{1} << 17;
  /// csv | json
  std::string format = "csv";
  /// Empty means stdout.
  std::string out;
  int n_min = 2;
  int n_max = 16;
  /// constant3 | correlated
  std::string example = "constant3";
  std::string trace;
  std::uint64_t trace_limit = 1000;
  std::string svg;
  unsigned workers = 0;
};

/// The parameters that determine the given command's output.
nlohmann::json config_json(const ExperimentConfig& config);

/// {"tool", "tool_version", "seed", "config"}
nlohmann::json provenance(const ExperimentConfig& config);

/// "# contention <version> <provenance json>"
std::string csv_preamble(const ExperimentConfig& config);

/// Throws DomainError for an unknown name.
ChannelModel parse_channel(const std::string& name, int n_users, double channel_epsilon);

std::string codebook_report(const ExperimentConfig& config);

/// Also writes the JSON-lines trace when config.trace is set.
std::string simulate_report(const ExperimentConfig& config);

struct SweepOutput {
  std::string table;
  std::string svg;  // empty unless config.svg is set
};
SweepOutput sweep_report(const ExperimentConfig& config);

struct ExampleOutput {
  std::string text;
  /// The example's own consistency assertion.
  bool assertion_holds = true;
  std::string assertion;
};
ExampleOutput example_report(const ExperimentConfig& config);

/// Writes content to path ("" or "-" is stdout). I/O failures throw
/// std::runtime_error naming the path and the command config.
void write_output(const ExperimentConfig& config, const std::string& path,
                  const std::string& content);

}  // namespace contention::cli
