#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nsasym/config.hpp"
#include "nsasym/solver.hpp"
#include "nsasym/verify.hpp"

namespace nsasym {

struct CommandOptions {
  std::string out_dir = ".";
  /// IC file for `simulate`, trajectory directory for the analysis
  /// commands; empty picks the default location inside out_dir.
  std::string input;
  /// Progress messages; null keeps the command silent.
  std::function<void(const std::string&)> log;
};

struct CommandOutcome {
  Verdict verdict;
  /// Files written, relative to out_dir.
  std::vector<std::string> files;
};

/// gen-ic, simulate, profiles, kcoeff, parity, verify, burgers.
const std::vector<std::string>& command_names();

/// Runs one command and writes its artifacts plus <command>_verdict.json.
/// Throws ConfigError / InvalidArgument / IoError for usage problems and
/// the numerical error types for upstream failures.
CommandOutcome run_command(const std::string& command, const RunConfig& config, const CommandOptions& options);

/// Trajectory directory: one NSAF file per snapshot plus index.json with
/// {t, file, norms} per snapshot.
void write_trajectory(const Trajectory& traj, const std::string& dir);
Trajectory read_trajectory(const std::string& dir);
void write_burgers_trajectory(const BurgersTrajectory& traj, const std::string& dir);
BurgersTrajectory read_burgers_trajectory(const std::string& dir);

/// Canonical JSON text of a verdict: rows in order, floats with 17
/// significant digits, non-finite numbers as null.
std::string verdict_json(const std::string& command, const Verdict& verdict);

} // namespace nsasym
