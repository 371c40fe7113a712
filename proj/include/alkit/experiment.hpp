#pragma once

#include <ostream>
#include <string>

#include "alkit/config.hpp"
#include "alkit/report.hpp"

namespace alkit {

// Executes every (strategy, seed) job, writing one JSON run record per job
// plus a combined results.csv and the resolved config, all atomically.
// `workers` > 1 runs jobs in parallel; results land in a deterministic order
// either way. With per_step_progress each step prints a line as it finishes.
void run_experiment(const ExperimentConfig& config, int workers, bool per_step_progress, std::ostream& log);

// Aggregates a results directory (results.csv, or the run records when the
// CSV is absent) into summary and mistake-rate tables, written alongside.
ReportTables report_results_dir(const std::string& results_dir, std::ostream& log);

std::string default_output_dir(const std::string& configured);

}  // namespace alkit
