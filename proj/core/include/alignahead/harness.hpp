#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alignahead/entry.hpp"
#include "alignahead/run_config.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Builds the graph named by the config and assigns its split.
CsrGraph load_dataset(const DatasetConfig& cfg);

/// Fresh students for one seed; student k is initialized from student_seed(seed, k).
std::vector<StudentModel> build_students(const RunConfig& cfg, const CsrGraph& graph,
                                         std::uint64_t seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  TrainResult result;
};

struct RunSummary {
  std::vector<SeedOutcome> runs;
  double mean = 0;  // headline metric over seeds
  double std = 0;   // sample standard deviation, 0 for a single seed
  /// Mean final-layer smoothness of the headline student at its best epoch.
  double mean_smoothness = 0;
};

/// One training run per seed. With `out_dir`, writes seed_<s>/metrics.csv,
/// seed_<s>/checkpoint.student<k>.bin and summary.json under it.
RunSummary execute_run(const RunConfig& cfg, const CsrGraph& graph,
                       const std::optional<std::filesystem::path>& out_dir,
                       std::ostream* progress = nullptr);

std::string summary_to_json(const RunConfig& cfg, const CsrGraph& graph, const RunSummary& summary);

enum class SweepAxis { Depth, Beta, Lambda, Students, BetaLambda };
SweepAxis parse_sweep_axis(std::string_view name);
const char* to_string(SweepAxis axis);

/// Copy of `cfg` with one axis set to `value` (normalized again).
RunConfig apply_sweep_value(RunConfig cfg, SweepAxis axis, std::string_view value);

struct SweepRow {
  std::vector<std::string> values;  // one entry, or (beta, lambda) for the grid
  RunSummary summary;
};

/// Every value (or value pair for beta_lambda) as an independent run batch;
/// writes sweep.csv plus one run directory per row when `out_dir` is set.
std::vector<SweepRow> execute_sweep(const RunConfig& cfg, SweepAxis axis,
                                    const std::vector<std::string>& values,
                                    const std::optional<std::filesystem::path>& out_dir,
                                    std::ostream* progress = nullptr);

ALIGNAHEAD_NAMESPACE_END
