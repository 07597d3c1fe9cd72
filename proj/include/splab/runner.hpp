#pragma once

#include "splab/report.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splab {

inline constexpr const char* version_string = "1.0.0";

enum class Scenario {
  zero_potential,
  ground_state,
  two_solutions,
  mu12_continuation,
  morse_report,
  pohozaev_check,
  audit_suite,
  sweep
};

std::string to_string(Scenario s);
Scenario scenario_from(const std::string& s);

struct GridSpec {
  int n = 2049;
  // Unset means 20 / sqrt(lambda).
  std::optional<double> r_max;

  double resolved_r_max(double lambda) const;
};

struct SweepAxis {
  // One of lambda, mu11, mu22, mu12, p, kappa.
  std::string parameter;
  std::vector<double> values;
  Scenario scenario = Scenario::ground_state;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::ground_state;
  Params model;
  GridSpec grid;
  SolverConfig solver;
  std::optional<SweepAxis> sweep;
  std::vector<double> mu12_schedule = {50, 100, 200, 400};
  int audit_samples = 1000;
  std::string output_dir;
  std::uint64_t rng_seed = 20240601;
  int workers = 1;

  // Throws ConfigError naming the violated constraint.
  void validate() const;
};

ScenarioConfig parse_config(std::string_view text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

// One concrete run per sweep value; a non-sweep config expands to itself.
std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& cfg);

json to_json(const ScenarioConfig& cfg);

struct LabeledSolution {
  std::string label;
  SolveReport report;
};

struct RunResult {
  std::vector<LabeledSolution> solutions;
  std::vector<AuditOutcome> audits;
  std::vector<std::string> failures;
  // Sweep entries, in value order.
  std::vector<RunResult> entries;
  std::vector<double> entry_values;
  double wall_seconds = 0;

  bool ok() const { return failures.empty(); }
};

// Runs the pipeline without touching the file system.
RunResult execute(const ScenarioConfig& cfg);

// Deterministic report: no timings, fixed key order.
json report_json(const ScenarioConfig& cfg, const RunResult& res);

// Writes report.json, timing.json, fields_*.csv, audits.csv and, for
// sweeps, summary.csv. Returns 0 iff every audit passed and no solve
// diverged, 1 on failed checks, 2 on I/O errors.
int run_scenario(const ScenarioConfig& cfg, std::ostream& log);

// Runs tasks on up to `workers` threads; results keep task order.
template <typename T>
std::vector<T> run_parallel(const std::vector<std::function<T()>>& tasks, int workers);

}  // namespace splab

#include "splab/parallel_impl.hpp"
