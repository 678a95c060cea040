#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbb/adversary.hpp"
#include "rbb/baselines.hpp"
#include "rbb/configuration.hpp"
#include "rbb/graph.hpp"
#include "rbb/metrics.hpp"

namespace rbb {

// Point estimate with a 95% Wilson score interval; the operational reading
// of "holds with high probability" across repeated runs.
struct WhpEstimate {
  double fraction = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};

WhpEstimate estimate_whp(std::uint64_t successes, std::uint64_t trials);

// Least-squares fit of log2(value) against log2(n). exponent is the slope,
// intercept the offset in log2 space, and max_rel_residual the largest
// |fitted - value| / value over the points.
struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double max_rel_residual = 0.0;
};

ScalingFit scaling_fit(std::span<const std::pair<double, double>> points);

// Type-7 (linear interpolation) quantile of the values; PreconditionError on
// an empty set.
double quantile(std::vector<double> values, double q);

// Median where `censored` of the observations exceeded every recorded value;
// empty when the median falls among the censored observations.
std::optional<double> censored_median(std::vector<double> observed, std::uint64_t censored);

enum class MRuleKind { equal_n, n_log_n, explicit_list };
enum class SuccessKind {
  none,
  converged,
  stability_censored,
  covered,
  faults_recovered,
  progress_rate,
  load_floor
};

std::string to_string(SuccessKind kind);
SuccessKind parse_success(std::string_view text);

struct TopologySpec {
  TopologyKind kind = TopologyKind::complete;
  std::uint32_t degree = 0;
  std::string path;

  // "complete", "ring", "regular:<d>" or "file:<path>".
  static TopologySpec parse(std::string_view text);
  std::string describe() const;
  Graph build(std::uint32_t n, std::uint64_t seed) const;
};

// One declarative experiment: a sweep over (n, m) cells with R seeded
// repetitions per cell.
struct ExperimentSpec {
  std::string id;
  TopologySpec topology;
  std::vector<std::uint32_t> n_values;
  MRuleKind m_rule = MRuleKind::equal_n;
  std::vector<std::uint64_t> m_values;
  Strategy strategy = Strategy::fifo;
  Placement placement;
  LegitimacyRule rule;
  // When no rule is given explicitly, balanced applies to m == n cells and
  // scaled to the rest.
  bool rule_explicit = false;
  std::string rounds_expr = "n";
  std::uint32_t repetitions = 1;
  std::uint64_t master_seed = 1;
  std::string faults;
  bool trace = false;
  bool progress_events = false;
  bool stop_on_cover = false;
  ProcessKind process = ProcessKind::base;
  std::uint64_t stride = 0;
  std::vector<std::uint64_t> checkpoints;
  SuccessKind success = SuccessKind::none;
  std::string success_window_expr = "8n";
  double progress_factor = 0.125;
  bool emit_jsonl = false;
  std::uint32_t start_node = 0;

  std::uint64_t resolve_m(std::uint32_t n, std::size_t m_index) const;
  LegitimacyRule resolve_rule(std::uint32_t n, std::uint64_t m) const;
};

// Plain-text config: one [section] per experiment, key = value lines, full
// and trailing '#'/';' comments. Unknown keys, bad values and duplicate ids
// raise ParseError with the line number.
std::vector<ExperimentSpec> parse_experiment_config(std::istream& in);
std::vector<ExperimentSpec> load_experiment_config(const std::string& path);

// One executed repetition: the run digest plus, for dominating-process
// experiments with checkpoints, the same-seed base-process checkpoint loads.
struct SweepRun {
  RunDigest digest;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> baseline_checkpoints;
};

struct CheckpointStats {
  std::uint64_t round = 0;
  double median_load = 0.0;
  double median_baseline_load = std::numeric_limits<double>::quiet_NaN();
  double dominance_fraction = std::numeric_limits<double>::quiet_NaN();
};

// Aggregates over the R repetitions of one (n, m) cell.
struct CellStats {
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t budget = 0;
  std::uint64_t threshold = 0;
  std::uint32_t repetitions = 0;
  SuccessKind success_kind = SuccessKind::none;
  std::uint64_t success_count = 0;
  std::uint64_t success_window = 0;
  WhpEstimate success;
  std::uint64_t convergence_censored = 0;
  std::uint64_t cover_censored = 0;
  std::uint64_t stability_violations = 0;
  std::uint64_t not_initially_legitimate = 0;
  std::optional<double> median_convergence;
  std::optional<double> median_cover;
  std::optional<double> median_min_progress;
  double median_max_load = 0.0;
  double median_mean_empty = 0.0;
  std::optional<double> convergence_over_n;
  // median cover divided by n * ceil_log2(n)^2.
  std::optional<double> normalized_cover;
  std::vector<CheckpointStats> checkpoints;
  std::optional<ScalingFit> checkpoint_fit;
  // Pooled post-convergence empty-fraction samples: p10/p25/p50/p75/p90 and
  // the fraction above 0.05.
  std::vector<double> empty_quantiles;
  double empty_above_005 = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t fault_events_total = 0;
  std::uint64_t fault_events_evaluable = 0;
  std::uint64_t fault_events_recovered_in_window = 0;
  std::optional<double> median_recovery;
};

struct SweepResult {
  ExperimentSpec spec;
  // Cell-major, repetition-minor; cell order follows n_values x m_values.
  std::vector<SweepRun> runs;
  std::vector<CellStats> cells;
  std::optional<ScalingFit> convergence_fit;
  std::optional<ScalingFit> cover_fit;
};

// Executes repetitions * cells seeded runs (deterministic per-run seeds from
// the master seed, experiment id, cell and repetition) and aggregates them.
// Worker threads share no mutable state; results are identical for any
// worker count. When jsonl_dir is non-empty and the experiment enables
// emit_jsonl, each run's sampled rounds are written there as JSON lines.
SweepResult run_experiment(const ExperimentSpec& spec, unsigned workers = 1,
                           const std::string& jsonl_dir = "");

// Success predicate used for the cell's run-fraction estimate.
bool run_succeeds(const ExperimentSpec& spec, const RunDigest& digest,
                  std::uint64_t success_window);

// Deterministic JSON summary of one experiment's sweep.
void write_summary_json(std::ostream& out, const SweepResult& result);

}  // namespace rbb
