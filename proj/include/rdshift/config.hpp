#pragma once
// Experiment configuration: a small INI dialect parsed into a fully typed,
// fully defaulted ExperimentConfig. Structural problems (bad section syntax,
// unknown sections or keys, duplicates) raise ParseError with the line
// number; value problems (wrong type, out of range, inconsistent sections)
// raise ValidationError naming the offending key.
//
// Format:
//   - lines are independent; '#' or ';' at the start of a (trimmed) line
//     opens a comment; blank lines are ignored
//   - '[section]' opens one of: environment, domain, time, experiment,
//     output, sweep
//   - 'key = value' inside a section; keys are lowercase identifiers;
//     values may be quoted with double quotes (quotes are stripped)
//   - list values are comma-separated numbers
// Every key is optional except [experiment] kind; omitted keys keep the
// defaults below.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rdshift/env.hpp"

namespace rdshift::config {

enum class ExperimentKind {
  cstar,          ///< linearized speed data + carrying orbit
  kpp_wave,       ///< forced KPP front at speed c (or nonexistence probe)
  pulse_wave,     ///< forced pulse wave at speed c <= -c_star
  ivp,            ///< lab-frame initial-value run + front-speed fit
  attraction,     ///< distance of an ivp run to the forced front
  epidemic,       ///< SIS application: derived constants, N-front, I-front
  period_limits,  ///< endemic orbits v_T across forcing periods T
  sweep           ///< fan one of the above over a parameter list
};

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);  // ValidationError
std::vector<std::string> all_kind_names();

/// [domain] — the PDE grid.
struct DomainSection {
  double x_min = -200.0;
  double x_max = 200.0;
  int n = 4001;
};

/// [time] — step density and run length. dt_divisor is the number of time
/// steps per forcing period (the wave solvers additionally need it divisible
/// by 64 for slice capture; that is their own run-time check).
struct TimeSection {
  int dt_divisor = 512;
  long horizon_periods = 60;
};

/// [experiment] — what to run and its scalar knobs. Keys outside the kind's
/// use are accepted and ignored by the driver (they are still type-checked).
/// The open family 'expect_<name> = value' declares thresholds: after the
/// run, report entry <name> is compared against value with absolute
/// tolerance expect_tol and a check_<name>=PASS|FAIL line is appended.
struct ExperimentSection {
  ExperimentKind kind = ExperimentKind::cstar;
  bool kind_set = false;  ///< filled by the parser; kind is mandatory

  double c = 0.0;           ///< shifting speed (wave / ivp / attraction / epidemic)
  double tolerance = 1e-8;  ///< wave iteration tolerance
  long max_periods = 2000;  ///< wave iteration cap
  double shift = 0.0;       ///< pulse envelope translation

  // ivp / attraction initial data (mirrors dynamics::InitialData factories).
  std::string init = "bump";  ///< bump | exp_tail | front | constant
  double init_height = 1.0;
  double init_center = 0.0;
  double init_width = 1.0;   ///< bump half-width
  double init_rate = 2.0;    ///< exp_tail decay rate

  // ivp fit window in periods; NaN = the fitter's default trailing window.
  double fit_t1 = std::nan("");
  double fit_t2 = std::nan("");

  std::vector<double> periods;  ///< period_limits T list; empty = default

  std::vector<std::pair<std::string, double>> expects;  ///< expect_* keys
  double expect_tol = 1e-6;
};

/// [output] — artifact paths; empty means "do not write". Content is built
/// in memory and written only after the computation succeeds.
struct OutputSection {
  std::string csv;
  std::string svg;
  std::string report;
};

/// [sweep] — present only when [experiment] kind = sweep. Each value of the
/// parameter runs the sub-experiment once; per-value artifact paths derive
/// from [output] by inserting '_<parameter>=<value>' before the extension.
struct SweepSection {
  bool present = false;
  std::string parameter;         ///< only "c" is supported
  std::vector<double> values;
  ExperimentKind experiment = ExperimentKind::ivp;  ///< sub-experiment kind
};

struct ExperimentConfig {
  env::EnvironmentParams environment;
  DomainSection domain;
  TimeSection time;
  ExperimentSection experiment;
  OutputSection output;
  SweepSection sweep;

  /// Value/consistency checks (everything that does not need the file
  /// system); throws ValidationError naming the key. parse_config calls
  /// this, so a returned config is already valid.
  void validate() const;

  /// Checks that each non-empty output path lies in an existing, writable
  /// directory; throws ValidationError naming the key. Separate from
  /// validate() so pure parsing stays file-system free.
  void validate_paths() const;
};

/// Parses and validates a config from text. ParseError / ValidationError.
ExperimentConfig parse_config(const std::string& text);

/// Reads the file and parses it; ParseError if the file cannot be read.
ExperimentConfig load_config(const std::string& path);

}  // namespace rdshift::config
