#pragma once
// Experiment drivers: every config kind maps to a driver that runs the
// computation, renders its artifacts (key=value report, CSV, SVG) in
// memory, and hands them back. Files are written only after the whole
// computation has succeeded, so a module error never leaves partial
// artifacts; anything written before a late failure is removed again.
//
// Nonexistence of a requested wave is a successful outcome: the report
// carries 'result=nonexistent (<Error>)' and the exit code stays 0. The
// exit code reflects run integrity only; threshold verdicts from
// expect_* keys live in the report (check_<name>=PASS|FAIL lines).
//
// Sweeps fan the sub-experiment out over a bounded worker pool (size from
// the RDSHIFT_WORKERS environment variable, otherwise the hardware count).
// Each worker computes against its own immutable config copy; the
// coordinator alone touches the file system, writing per-value artifacts
// in the order the values appear in the config. A failed value contributes
// an error block to the report instead of artifacts; completed values keep
// theirs, and the overall exit code turns nonzero.

#include <string>
#include <vector>

#include "rdshift/config.hpp"

namespace rdshift::experiments {

struct Artifact {
  std::string path;
  std::string content;
};

struct RunOutcome {
  int exit_code = 0;
  std::string report_text;          ///< also written to the report path if set
  std::vector<Artifact> artifacts;  ///< on disk already when exit_code == 0
  std::string error;                ///< "ErrorType: message" when nonzero
};

RunOutcome run_experiment(const config::ExperimentConfig& cfg);

/// Sweep pool size: RDSHIFT_WORKERS when set to a positive integer
/// (malformed values are ignored), else the hardware thread count;
/// always clamped to [1, min(jobs, 64)].
int worker_count(size_t jobs);

/// Name lists for the CLI's list-kinds verb.
std::vector<std::string> experiment_kind_names();
std::vector<std::string> environment_kind_names();
std::vector<std::string> initial_data_names();

}  // namespace rdshift::experiments
