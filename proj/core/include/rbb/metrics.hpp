#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbb/configuration.hpp"

namespace rbb {

enum class ProcessKind { base, dominating, memoryless, single_ball };

std::string to_string(ProcessKind kind);
std::string to_string(Strategy strategy);
ProcessKind parse_process(std::string_view text);
Strategy parse_strategy(std::string_view text);

// Threshold realizing "legitimate = max load below an explicit log-scale
// bound". balanced targets the m = n regime; scaled multiplies by the mean
// load m/n; additive adds it. The result is clamped to at least ceil(m/n),
// below which no configuration could qualify.
struct LegitimacyRule {
  enum class Form { balanced, scaled, additive };

  Form form = Form::balanced;
  double alpha = 4.0;

  std::uint64_t threshold(std::uint32_t n, std::uint64_t m) const;
};

std::string to_string(LegitimacyRule::Form form);
LegitimacyRule::Form parse_rule_form(std::string_view text);

std::uint64_t max_load(const Configuration& c);
double empty_fraction(const Configuration& c);
bool is_legitimate(const Configuration& c, const LegitimacyRule& rule);

struct RoundSample {
  std::uint64_t round = 0;
  std::uint64_t max_load = 0;
  double empty_fraction = 0.0;
  bool legitimate = false;
  bool fault = false;
};

struct FaultEvent {
  std::uint64_t round = 0;
  std::optional<std::uint64_t> recovered_round;
};

struct BallSummary {
  std::uint64_t progress_total = 0;
  std::optional<std::uint64_t> cover_round;
  bool events_recorded = false;
  std::vector<std::uint64_t> progress_rounds;
};

// One seeded trajectory: identity echo, per-sampled-round metric stream and
// streamed whole-run summaries. Max load and legitimacy are evaluated every
// round even when sampling is strided.
struct RunRecord {
  std::string experiment_id;
  ProcessKind process = ProcessKind::base;
  std::uint64_t seed = 0;
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::string topology;
  std::string strategy;
  LegitimacyRule rule;
  std::uint64_t threshold = 0;
  std::uint64_t budget = 0;
  std::uint64_t rounds_executed = 0;
  std::uint64_t stride = 1;
  bool traced = false;
  bool initial_legitimate = false;
  std::optional<std::uint64_t> first_legitimate_round;
  std::optional<std::uint64_t> first_violation_round;
  std::uint64_t max_load_overall = 0;
  double mean_empty_fraction = 0.0;
  std::uint64_t final_ball_count = 0;
  std::optional<std::uint64_t> cover_time;
  std::vector<RoundSample> samples;
  std::vector<FaultEvent> fault_events;
  std::vector<BallSummary> ball_progress;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> checkpoint_loads;
};

// First round (0 counts) with a legitimate configuration; empty = censored
// at the budget.
std::optional<std::uint64_t> convergence_time(const RunRecord& record);

// First round with a legitimacy violation after a legitimate start; empty =
// censored (no violation within the executed rounds). PreconditionError if
// the run did not start legitimate.
std::optional<std::uint64_t> stability_horizon(const RunRecord& record);

// Re-evaluates the horizon under a different rule. Requires per-round
// samples (stride 1), since only sampled max loads can be re-thresholded.
std::optional<std::uint64_t> stability_horizon(const RunRecord& record,
                                               const LegitimacyRule& rule);

// Round by which every ball had visited every node; empty = censored.
// TracingRequiredError on anonymous-mode records.
std::optional<std::uint64_t> parallel_cover_time(const RunRecord& record);

// Smallest whole-run forwarding count over all balls. TracingRequiredError
// on anonymous-mode records.
std::uint64_t min_progress(const RunRecord& record);

// Number of forwarding events in the window (from_round, to_round], i.e.
// rounds r with from_round < r <= to_round. Requires recorded progress
// rounds (TraceOptions::record_progress_rounds).
std::uint64_t progress(const BallTrace& trace, std::uint64_t from_round,
                       std::uint64_t to_round);
std::uint64_t progress(const BallSummary& ball, std::uint64_t from_round,
                       std::uint64_t to_round);

// Scalar summary of a run, sufficient for one results-CSV row and for
// cross-run aggregation.
struct RunDigest {
  std::string experiment_id;
  ProcessKind process = ProcessKind::base;
  std::uint64_t seed = 0;
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::string topology;
  std::string strategy;
  LegitimacyRule rule;
  std::uint64_t threshold = 0;
  std::uint64_t budget = 0;
  std::uint64_t rounds_executed = 0;
  bool traced = false;
  bool initial_legitimate = false;
  std::optional<std::uint64_t> convergence;
  std::optional<std::uint64_t> stability_violation;
  std::optional<std::uint64_t> cover;
  std::optional<std::uint64_t> min_ball_progress;
  std::uint64_t max_load_overall = 0;
  double mean_empty_fraction = 0.0;
  std::uint64_t final_ball_count = 0;
  std::vector<FaultEvent> fault_events;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> checkpoint_loads;
  std::vector<double> post_convergence_empty;
};

RunDigest digest_of(const RunRecord& record);

// Per-sampled-round serialization: JSON lines and a CSV with the same
// columns (round, max_load, empty_fraction, legitimate, fault, process).
void write_jsonl(std::ostream& out, const RunRecord& record);
void write_round_csv(std::ostream& out, const RunRecord& record);

// Whole-run summary rows. Censored durations print the budget with the
// censored flag set; metrics a run cannot provide (per-ball data of an
// anonymous run, stability of a non-legitimate start) print empty fields.
std::string results_csv_header();
void write_results_row(std::ostream& out, const RunDigest& digest);

}  // namespace rbb
