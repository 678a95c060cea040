#include "rbb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rbb/errors.hpp"

namespace rbb {

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::base:
      return "base";
    case ProcessKind::dominating:
      return "dominating";
    case ProcessKind::memoryless:
      return "memoryless";
    default:
      return "single_ball";
  }
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::fifo:
      return "fifo";
    case Strategy::lifo:
      return "lifo";
    default:
      return "random";
  }
}

ProcessKind parse_process(std::string_view text) {
  if (text == "base") return ProcessKind::base;
  if (text == "dominating") return ProcessKind::dominating;
  if (text == "memoryless") return ProcessKind::memoryless;
  if (text == "single_ball") return ProcessKind::single_ball;
  throw ParseError("unknown process kind: '" + std::string(text) + "'");
}

Strategy parse_strategy(std::string_view text) {
  if (text == "fifo") return Strategy::fifo;
  if (text == "lifo") return Strategy::lifo;
  if (text == "random") return Strategy::uniform_random;
  throw ParseError("unknown strategy: '" + std::string(text) + "'");
}

std::string to_string(LegitimacyRule::Form form) {
  switch (form) {
    case LegitimacyRule::Form::balanced:
      return "balanced";
    case LegitimacyRule::Form::scaled:
      return "scaled";
    default:
      return "additive";
  }
}

LegitimacyRule::Form parse_rule_form(std::string_view text) {
  if (text == "balanced") return LegitimacyRule::Form::balanced;
  if (text == "scaled") return LegitimacyRule::Form::scaled;
  if (text == "additive") return LegitimacyRule::Form::additive;
  throw ParseError("unknown legitimacy rule: '" + std::string(text) + "'");
}

std::uint64_t LegitimacyRule::threshold(std::uint32_t n, std::uint64_t m) const {
  if (alpha <= 0.0) throw PreconditionError("legitimacy alpha must be positive");
  if (n < 2) throw PreconditionError("legitimacy threshold needs n >= 2");
  const double log2n = std::log2(static_cast<double>(n));
  const double mean = static_cast<double>(m) / static_cast<double>(n);
  double value = 0.0;
  switch (form) {
    case Form::balanced:
      value = alpha * log2n;
      break;
    case Form::scaled:
      value = alpha * mean * log2n;
      break;
    case Form::additive:
      value = alpha * (mean + log2n);
      break;
  }
  const std::uint64_t floor_threshold = (m + n - 1) / n;
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(std::ceil(value)),
                                 floor_threshold);
}

std::uint64_t max_load(const Configuration& c) {
  std::uint32_t best = 0;
  for (std::uint32_t v = 0; v < c.node_count(); ++v) best = std::max(best, c.load(v));
  return best;
}

double empty_fraction(const Configuration& c) {
  std::uint32_t zeros = 0;
  for (std::uint32_t v = 0; v < c.node_count(); ++v) zeros += (c.load(v) == 0);
  return static_cast<double>(zeros) / static_cast<double>(c.node_count());
}

bool is_legitimate(const Configuration& c, const LegitimacyRule& rule) {
  return max_load(c) <= rule.threshold(c.node_count(), c.ball_count());
}

std::optional<std::uint64_t> convergence_time(const RunRecord& record) {
  return record.first_legitimate_round;
}

std::optional<std::uint64_t> stability_horizon(const RunRecord& record) {
  if (!record.initial_legitimate) {
    throw PreconditionError("stability horizon needs a legitimate starting configuration");
  }
  return record.first_violation_round;
}

std::optional<std::uint64_t> stability_horizon(const RunRecord& record,
                                               const LegitimacyRule& rule) {
  if (record.stride != 1 || record.samples.size() != record.rounds_executed + 1) {
    throw PreconditionError("re-thresholding needs per-round samples (stride 1)");
  }
  const std::uint64_t threshold = rule.threshold(record.n, record.m);
  if (record.samples.front().max_load > threshold) {
    throw PreconditionError("stability horizon needs a legitimate starting configuration");
  }
  for (const RoundSample& s : record.samples) {
    if (s.max_load > threshold) return s.round;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> parallel_cover_time(const RunRecord& record) {
  if (!record.traced) throw TracingRequiredError("cover time needs a traced run");
  return record.cover_time;
}

std::uint64_t min_progress(const RunRecord& record) {
  if (!record.traced || record.ball_progress.empty()) {
    throw TracingRequiredError("per-ball progress needs a traced run");
  }
  std::uint64_t best = ~std::uint64_t{0};
  for (const BallSummary& b : record.ball_progress) {
    best = std::min(best, b.progress_total);
  }
  return best;
}

namespace {

std::uint64_t count_in_window(const std::vector<std::uint64_t>& rounds, bool recorded,
                              std::uint64_t from_round, std::uint64_t to_round) {
  if (from_round > to_round) {
    throw PreconditionError("progress window must satisfy from <= to");
  }
  if (!recorded) {
    throw TracingRequiredError("windowed progress needs recorded progress rounds");
  }
  const auto lo = std::upper_bound(rounds.begin(), rounds.end(), from_round);
  const auto hi = std::upper_bound(rounds.begin(), rounds.end(), to_round);
  return static_cast<std::uint64_t>(hi - lo);
}

}  // namespace

std::uint64_t progress(const BallTrace& trace, std::uint64_t from_round,
                       std::uint64_t to_round) {
  return count_in_window(trace.progress_rounds, trace.events_recorded, from_round, to_round);
}

std::uint64_t progress(const BallSummary& ball, std::uint64_t from_round,
                       std::uint64_t to_round) {
  return count_in_window(ball.progress_rounds, ball.events_recorded, from_round, to_round);
}

RunDigest digest_of(const RunRecord& record) {
  RunDigest d;
  d.experiment_id = record.experiment_id;
  d.process = record.process;
  d.seed = record.seed;
  d.n = record.n;
  d.m = record.m;
  d.topology = record.topology;
  d.strategy = record.strategy;
  d.rule = record.rule;
  d.threshold = record.threshold;
  d.budget = record.budget;
  d.rounds_executed = record.rounds_executed;
  d.traced = record.traced;
  d.initial_legitimate = record.initial_legitimate;
  d.convergence = record.first_legitimate_round;
  d.stability_violation = record.initial_legitimate ? record.first_violation_round
                                                    : std::nullopt;
  d.cover = record.cover_time;
  if (record.traced && !record.ball_progress.empty()) {
    d.min_ball_progress = min_progress(record);
  }
  d.max_load_overall = record.max_load_overall;
  d.mean_empty_fraction = record.mean_empty_fraction;
  d.final_ball_count = record.final_ball_count;
  d.fault_events = record.fault_events;
  d.checkpoint_loads = record.checkpoint_loads;
  if (record.first_legitimate_round) {
    for (const RoundSample& s : record.samples) {
      if (s.round >= *record.first_legitimate_round) {
        d.post_convergence_empty.push_back(s.empty_fraction);
      }
    }
  }
  return d;
}

namespace {

std::string format_fraction(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string format_alpha(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

}  // namespace

void write_jsonl(std::ostream& out, const RunRecord& record) {
  const std::string process = to_string(record.process);
  for (const RoundSample& s : record.samples) {
    out << "{\"round\":" << s.round << ",\"max_load\":" << s.max_load
        << ",\"empty_fraction\":" << format_fraction(s.empty_fraction)
        << ",\"legitimate\":" << (s.legitimate ? "true" : "false")
        << ",\"fault\":" << (s.fault ? "true" : "false") << ",\"process\":\"" << process
        << "\"}\n";
  }
}

void write_round_csv(std::ostream& out, const RunRecord& record) {
  const std::string process = to_string(record.process);
  out << "round,max_load,empty_fraction,legitimate,fault,process\n";
  for (const RoundSample& s : record.samples) {
    out << s.round << ',' << s.max_load << ',' << format_fraction(s.empty_fraction) << ','
        << (s.legitimate ? 1 : 0) << ',' << (s.fault ? 1 : 0) << ',' << process << '\n';
  }
}

std::string results_csv_header() {
  return "experiment,seed,n,m,topology,strategy,alpha,convergence_time,"
         "convergence_censored,stability_horizon,stability_censored,parallel_cover_time,"
         "cover_censored,min_progress,max_load_overall,mean_empty_fraction,process";
}

void write_results_row(std::ostream& out, const RunDigest& d) {
  out << d.experiment_id << ',' << d.seed << ',' << d.n << ',' << d.m << ',' << d.topology
      << ',' << d.strategy << ',' << format_alpha(d.rule.alpha) << ',';
  if (d.convergence) {
    out << *d.convergence << ",0,";
  } else {
    out << d.budget << ",1,";
  }
  if (!d.initial_legitimate) {
    out << ",,";
  } else if (d.stability_violation) {
    out << *d.stability_violation << ",0,";
  } else {
    out << d.budget << ",1,";
  }
  if (!d.traced) {
    out << ",,";
  } else if (d.cover) {
    out << *d.cover << ",0,";
  } else {
    out << d.budget << ",1,";
  }
  if (d.min_ball_progress) {
    out << *d.min_ball_progress;
  }
  out << ',' << d.max_load_overall << ',' << format_fraction(d.mean_empty_fraction) << ','
      << to_string(d.process) << '\n';
}

}  // namespace rbb
