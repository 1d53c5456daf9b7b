#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace thermal::cli {

enum ExitCode : int { ok = 0, assertion_failed = 1, config_error = 2, io_error = 3 };

/// One checked number with its tolerance.
struct Assertion {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=", ">", "<"
  bool pass = false;
};

/// Results of one command: free-form JSON plus assertions and CSV tables.
class Report {
 public:
  nlohmann::ordered_json results = nlohmann::ordered_json::object();

  void check(const std::string& name, double value, const std::string& relation, double tolerance);
  /// Table with a versioned '#' header line, written when csv output is enabled.
  void table(const std::string& file, const std::string& version, std::vector<std::string> columns,
             std::vector<std::vector<double>> rows);

  [[nodiscard]] bool pass() const;
  [[nodiscard]] const std::vector<Assertion>& assertions() const { return assertions_; }

  struct Table {
    std::string file;
    std::string version;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
  };
  [[nodiscard]] const std::vector<Table>& tables() const { return tables_; }

 private:
  std::vector<Assertion> assertions_;
  std::vector<Table> tables_;
};

/// Runs one command against a validated config; artifacts other than tables
/// (ensembles) are written into `dir` directly.
Report run_command(const std::string& command, RunConfig& config, const std::filesystem::path& dir);

/// Full front end: argument parsing, config file, OUTPUT_DIR, dispatch and
/// artifact writing. Returns the process exit status.
int run_main(const std::vector<std::string>& args);

}  // namespace thermal::cli
