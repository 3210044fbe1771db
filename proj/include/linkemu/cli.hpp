#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace linkemu::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kStaticVerificationFailed = 2,
  kRuntimeVerificationFailed = 3,
  kRunFailed = 4,
};

struct RunOptions {
  std::string scenario_path;
  std::uint64_t seed = 0;
  std::optional<double> until_s;
  bool realtime = false;
  double speed = 1.0;
  std::string out_dir;
  bool trace = false;
};

enum class ReportKind { throughput, histogram };

struct ReportOptions {
  std::string metrics_dir;
  ReportKind kind = ReportKind::throughput;
  double bin_ms = 10.0;
  std::optional<std::string> link;
  std::optional<std::string> dir;
  std::optional<std::string> flow;
};

int cmd_verify(const std::string& scenario_path, std::ostream& out, std::ostream& err);

// Writes throughput.csv, delays.csv, drops.csv, allocations.csv, verification.csv,
// summary.txt (and trace.log with `trace`) into out_dir. Nothing is written on failure.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

// Prints plot-ready CSV derived from a metrics directory on `out`.
int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err);

// Entry point shared by the executable: `verify`, `run` and `report` subcommands.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace linkemu::cli
