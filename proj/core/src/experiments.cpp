#include "rbb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "rbb/errors.hpp"
#include "rbb/expr.hpp"
#include "rbb/process.hpp"

namespace rbb {

WhpEstimate estimate_whp(std::uint64_t successes, std::uint64_t trials) {
  if (trials < 1) throw PreconditionError("estimate needs at least one trial");
  if (successes > trials) throw PreconditionError("successes exceed trials");
  constexpr double z = 1.959963984540054;
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / t;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / t;
  const double center = p + z2 / (2.0 * t);
  const double half = z * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
  WhpEstimate est;
  est.fraction = p;
  est.lower = std::max(0.0, (center - half) / denom);
  est.upper = std::min(1.0, (center + half) / denom);
  return est;
}

ScalingFit scaling_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw FitError("scaling fit needs at least 3 points");
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw FitError("scaling fit needs positive values");
    mean_x += std::log2(x);
    mean_y += std::log2(y);
  }
  mean_x /= static_cast<double>(points.size());
  mean_y /= static_cast<double>(points.size());
  double cov = 0.0;
  double var = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log2(x) - mean_x;
    const double dy = std::log2(y) - mean_y;
    cov += dx * dy;
    var += dx * dx;
  }
  if (var == 0.0) throw FitError("scaling fit needs at least two distinct sizes");
  ScalingFit fit;
  fit.exponent = cov / var;
  fit.intercept = mean_y - fit.exponent * mean_x;
  for (const auto& [x, y] : points) {
    const double fitted = std::exp2(fit.exponent * std::log2(x) + fit.intercept);
    fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(fitted - y) / y);
  }
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw PreconditionError("quantile of an empty set");
  if (q < 0.0 || q > 1.0) throw PreconditionError("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::optional<double> censored_median(std::vector<double> observed, std::uint64_t censored) {
  const std::uint64_t total = observed.size() + censored;
  if (total == 0) return std::nullopt;
  const double h = static_cast<double>(total - 1) * 0.5;
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  if (hi >= observed.size()) return std::nullopt;
  std::sort(observed.begin(), observed.end());
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  return observed[lo] + (h - static_cast<double>(lo)) * (observed[hi] - observed[lo]);
}

std::string to_string(SuccessKind kind) {
  switch (kind) {
    case SuccessKind::none:
      return "none";
    case SuccessKind::converged:
      return "converged";
    case SuccessKind::stability_censored:
      return "stability_censored";
    case SuccessKind::covered:
      return "covered";
    case SuccessKind::faults_recovered:
      return "faults_recovered";
    case SuccessKind::progress_rate:
      return "progress_rate";
    default:
      return "load_floor";
  }
}

SuccessKind parse_success(std::string_view text) {
  if (text == "none") return SuccessKind::none;
  if (text == "converged") return SuccessKind::converged;
  if (text == "stability_censored") return SuccessKind::stability_censored;
  if (text == "covered") return SuccessKind::covered;
  if (text == "faults_recovered") return SuccessKind::faults_recovered;
  if (text == "progress_rate") return SuccessKind::progress_rate;
  if (text == "load_floor") return SuccessKind::load_floor;
  throw ParseError("unknown success kind: '" + std::string(text) + "'");
}

TopologySpec TopologySpec::parse(std::string_view text) {
  TopologySpec spec;
  if (text == "complete") {
    spec.kind = TopologyKind::complete;
  } else if (text == "ring") {
    spec.kind = TopologyKind::ring;
  } else if (text.rfind("regular:", 0) == 0) {
    const std::string digits(text.substr(8));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("bad regular degree in topology '" + std::string(text) + "'");
    }
    spec.kind = TopologyKind::random_regular;
    spec.degree = static_cast<std::uint32_t>(std::stoul(digits));
  } else if (text.rfind("file:", 0) == 0) {
    spec.kind = TopologyKind::custom;
    spec.path = std::string(text.substr(5));
    if (spec.path.empty()) throw ParseError("topology file path is empty");
  } else {
    throw ParseError("unknown topology '" + std::string(text) +
                     "' (expected complete, ring, regular:<d> or file:<path>)");
  }
  return spec;
}

std::string TopologySpec::describe() const {
  switch (kind) {
    case TopologyKind::complete:
      return "complete";
    case TopologyKind::ring:
      return "ring";
    case TopologyKind::random_regular:
      return "regular:" + std::to_string(degree);
    default:
      return "file:" + path;
  }
}

Graph TopologySpec::build(std::uint32_t n, std::uint64_t seed) const {
  switch (kind) {
    case TopologyKind::complete:
      return make_complete(n);
    case TopologyKind::ring:
      return make_ring(n);
    case TopologyKind::random_regular:
      return make_random_regular(n, degree, seed);
    default: {
      Graph g = load_edge_list(path);
      if (g.node_count() != n) {
        throw TopologyError("edge list '" + path + "' has " +
                            std::to_string(g.node_count()) + " nodes, expected " +
                            std::to_string(n));
      }
      return g;
    }
  }
}

std::uint64_t ExperimentSpec::resolve_m(std::uint32_t n, std::size_t m_index) const {
  switch (m_rule) {
    case MRuleKind::equal_n:
      return n;
    case MRuleKind::n_log_n:
      return static_cast<std::uint64_t>(n) * ceil_log2(n);
    default:
      return m_values.at(m_index);
  }
}

LegitimacyRule ExperimentSpec::resolve_rule(std::uint32_t n, std::uint64_t m) const {
  LegitimacyRule resolved = rule;
  if (!rule_explicit) {
    resolved.form = (m == n) ? LegitimacyRule::Form::balanced : LegitimacyRule::Form::scaled;
  }
  return resolved;
}

namespace {

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

// Cuts a full-line or whitespace-preceded trailing comment.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') &&
        (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    if (pos == std::string::npos) {
      items.push_back(trim(std::string_view(text).substr(start)));
      break;
    }
    items.push_back(trim(std::string_view(text).substr(start, pos - start)));
    start = pos + 1;
  }
  return items;
}

std::uint64_t parse_u64(const std::string& text, std::uint64_t line_no) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos ||
      text.size() > 19) {
    throw ParseError("expected a non-negative integer, got '" + text + "'", line_no);
  }
  return std::stoull(text);
}

bool parse_bool(const std::string& text, std::uint64_t line_no) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ParseError("expected a boolean, got '" + text + "'", line_no);
}

double parse_positive_real(const std::string& text, std::uint64_t line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !(value > 0.0)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParseError("expected a positive real, got '" + text + "'", line_no);
  }
}

Placement parse_placement(const std::string& text, std::uint64_t line_no) {
  if (text == "spread") return Placement::one_per_node();
  if (text == "random") return Placement::uniform_random();
  if (text.rfind("point:", 0) == 0) {
    return Placement::all_in_one(
        static_cast<std::uint32_t>(parse_u64(text.substr(6), line_no)));
  }
  throw ParseError("unknown placement '" + text + "' (expected spread, point:<idx> or random)",
                   line_no);
}

std::string normalize_m_expr(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') {
      return false;
    }
  }
  return true;
}

void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value,
               std::uint64_t line_no) {
  try {
    if (key == "topology") {
      spec.topology = TopologySpec::parse(value);
    } else if (key == "n") {
      spec.n_values.clear();
      for (const std::string& item : split_list(value)) {
        const std::uint64_t n = parse_u64(item, line_no);
        if (n < 2 || n > 0xffffffffULL) {
          throw ParseError("n must lie in [2, 2^32), got '" + item + "'", line_no);
        }
        spec.n_values.push_back(static_cast<std::uint32_t>(n));
      }
    } else if (key == "m") {
      const std::string normalized = normalize_m_expr(value);
      if (normalized == "n") {
        spec.m_rule = MRuleKind::equal_n;
      } else if (normalized == "nlog2n" || normalized == "nlog2(n)") {
        spec.m_rule = MRuleKind::n_log_n;
      } else {
        spec.m_rule = MRuleKind::explicit_list;
        spec.m_values.clear();
        for (const std::string& item : split_list(value)) {
          const std::uint64_t m = parse_u64(item, line_no);
          if (m < 1) throw ParseError("m must be at least 1", line_no);
          spec.m_values.push_back(m);
        }
      }
    } else if (key == "strategy") {
      spec.strategy = parse_strategy(value);
    } else if (key == "placement") {
      spec.placement = parse_placement(value, line_no);
    } else if (key == "alpha") {
      spec.rule.alpha = parse_positive_real(value, line_no);
    } else if (key == "rule") {
      spec.rule.form = parse_rule_form(value);
      spec.rule_explicit = true;
    } else if (key == "rounds") {
      spec.rounds_expr = value;
    } else if (key == "repetitions") {
      const std::uint64_t r = parse_u64(value, line_no);
      if (r < 1 || r > 0xffffffffULL) throw ParseError("repetitions must be >= 1", line_no);
      spec.repetitions = static_cast<std::uint32_t>(r);
    } else if (key == "seed") {
      spec.master_seed = parse_u64(value, line_no);
    } else if (key == "faults") {
      spec.faults = value;
      FaultSchedule::parse(value, 16);
    } else if (key == "trace") {
      spec.trace = parse_bool(value, line_no);
    } else if (key == "progress_events") {
      spec.progress_events = parse_bool(value, line_no);
    } else if (key == "stop_on_cover") {
      spec.stop_on_cover = parse_bool(value, line_no);
    } else if (key == "emit_jsonl") {
      spec.emit_jsonl = parse_bool(value, line_no);
    } else if (key == "process") {
      spec.process = parse_process(value);
    } else if (key == "stride") {
      spec.stride = parse_u64(value, line_no);
    } else if (key == "checkpoints") {
      spec.checkpoints.clear();
      for (const std::string& item : split_list(value)) {
        spec.checkpoints.push_back(parse_u64(item, line_no));
      }
    } else if (key == "success") {
      spec.success = parse_success(value);
    } else if (key == "success_window") {
      spec.success_window_expr = value;
    } else if (key == "progress_factor") {
      spec.progress_factor = parse_positive_real(value, line_no);
    } else if (key == "start") {
      spec.start_node = static_cast<std::uint32_t>(parse_u64(value, line_no));
    } else {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line_no);
  }
}

void validate_spec(const ExperimentSpec& spec) {
  const std::string where = "experiment '" + spec.id + "': ";
  if (spec.n_values.empty()) throw ParseError(where + "no n values given");
  if (spec.m_rule == MRuleKind::explicit_list && spec.m_values.empty()) {
    throw ParseError(where + "empty m list");
  }
  for (const std::uint32_t n : spec.n_values) {
    try {
      eval_round_expr(spec.rounds_expr, n);
      eval_round_expr(spec.success_window_expr, n);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  if (spec.success == SuccessKind::progress_rate && !spec.trace) {
    throw ParseError(where + "progress_rate success needs trace = true");
  }
  if (spec.success == SuccessKind::covered && !spec.trace &&
      spec.process != ProcessKind::single_ball) {
    throw ParseError(where + "covered success needs trace = true");
  }
  if (spec.success == SuccessKind::faults_recovered && spec.faults.empty()) {
    throw ParseError(where + "faults_recovered success needs a fault schedule");
  }
}

}  // namespace

std::vector<ExperimentSpec> parse_experiment_config(std::istream& in) {
  std::vector<ExperimentSpec> specs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::uint64_t line_no = 0;
  bool in_section = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(strip_comment(line));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ParseError("unterminated section header", line_no);
      const std::string id = trim(std::string_view(content).substr(1, content.size() - 2));
      if (!valid_id(id)) {
        throw ParseError("experiment id must be non-empty [A-Za-z0-9_.-]: '" + id + "'",
                         line_no);
      }
      if (!ids.insert(id).second) {
        throw ParseError("duplicate experiment id '" + id + "'", line_no);
      }
      if (in_section) validate_spec(specs.back());
      specs.emplace_back();
      specs.back().id = id;
      in_section = true;
      continue;
    }
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value' or '[experiment]'", line_no);
    }
    if (!in_section) throw ParseError("key outside an experiment section", line_no);
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (value.empty()) throw ParseError("empty value for key '" + key + "'", line_no);
    apply_key(specs.back(), key, value, line_no);
  }
  if (in_section) validate_spec(specs.back());
  return specs;
}

std::vector<ExperimentSpec> load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  try {
    return parse_experiment_config(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

bool run_succeeds(const ExperimentSpec& spec, const RunDigest& d,
                  std::uint64_t success_window) {
  switch (spec.success) {
    case SuccessKind::none:
      return true;
    case SuccessKind::converged:
      return d.convergence.has_value();
    case SuccessKind::stability_censored:
      return d.initial_legitimate && !d.stability_violation;
    case SuccessKind::covered:
      return d.cover.has_value();
    case SuccessKind::faults_recovered: {
      std::uint64_t evaluable = 0;
      for (const FaultEvent& e : d.fault_events) {
        if (e.round + success_window > d.rounds_executed) continue;
        ++evaluable;
        if (!e.recovered_round || *e.recovered_round - e.round > success_window) return false;
      }
      return evaluable > 0;
    }
    case SuccessKind::progress_rate: {
      if (!d.min_ball_progress) return false;
      const double bound = spec.progress_factor * static_cast<double>(d.budget) /
                           std::log2(static_cast<double>(d.n));
      return static_cast<double>(*d.min_ball_progress) >= bound;
    }
    default: {
      if (d.n < 4) return d.max_load_overall >= 1;
      const double l2 = std::log2(static_cast<double>(d.n));
      const auto floor_value =
          static_cast<std::uint64_t>(std::ceil(l2 / (4.0 * std::log2(l2))));
      return d.max_load_overall >= floor_value;
    }
  }
}

namespace {

struct Cell {
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t budget = 0;
  std::uint64_t window = 0;
  LegitimacyRule rule;
  std::uint64_t threshold = 0;
};

SweepRun execute_task(const ExperimentSpec& spec, const Cell& cell, std::uint32_t rep,
                      const std::string& jsonl_dir) {
  const std::uint64_t seed = derive_seed(spec.master_seed, spec.id, cell.n, cell.m, rep);
  RunOptions opts;
  opts.rounds = cell.budget;
  opts.stride = spec.stride;
  opts.rule = cell.rule;
  opts.checkpoints = spec.checkpoints;
  opts.experiment_id = spec.id;
  opts.seed = seed;

  SweepRun out;
  RunRecord record;
  switch (spec.process) {
    case ProcessKind::memoryless: {
      record = run_memoryless(cell.n, cell.m, opts, seed);
      break;
    }
    case ProcessKind::single_ball: {
      const Graph g = spec.topology.build(cell.n, RunRngs::graph_seed(seed));
      record = run_single_ball(g, spec.start_node, cell.budget, seed, opts);
      break;
    }
    case ProcessKind::dominating: {
      const Graph g = spec.topology.build(cell.n, RunRngs::graph_seed(seed));
      RunRngs rngs = RunRngs::from_seed(seed);
      Configuration c0 =
          init_config(g, cell.m, spec.placement, Mode::anonymous, rngs.order);
      opts.process = ProcessKind::dominating;
      record = run(std::move(c0), g, spec.strategy, opts, rngs);
      if (!spec.checkpoints.empty()) {
        RunRngs base_rngs = RunRngs::from_seed(seed);
        Configuration b0 =
            init_config(g, cell.m, spec.placement, Mode::anonymous, base_rngs.order);
        RunOptions base_opts = opts;
        base_opts.process = ProcessKind::base;
        const RunRecord base = run(std::move(b0), g, spec.strategy, base_opts, base_rngs);
        out.baseline_checkpoints = base.checkpoint_loads;
      }
      break;
    }
    default: {
      const Graph g = spec.topology.build(cell.n, RunRngs::graph_seed(seed));
      RunRngs rngs = RunRngs::from_seed(seed);
      const Mode mode = spec.trace ? Mode::traced : Mode::anonymous;
      TraceOptions topts;
      topts.record_progress_rounds = spec.progress_events;
      Configuration c0 = init_config(g, cell.m, spec.placement, mode, rngs.order, topts);
      CoverStopObserver cover_stop;
      std::vector<RoundObserver*> observers;
      if (spec.stop_on_cover) observers.push_back(&cover_stop);
      const std::span<RoundObserver* const> span(observers.data(), observers.size());
      if (!spec.faults.empty()) {
        const FaultSchedule schedule = FaultSchedule::parse(spec.faults, cell.n);
        record = faulty_run(std::move(c0), g, spec.strategy, opts, schedule, rngs, span);
      } else {
        record = run(std::move(c0), g, spec.strategy, opts, rngs, span);
      }
      break;
    }
  }

  if (spec.emit_jsonl && !jsonl_dir.empty()) {
    std::ostringstream name;
    name << jsonl_dir << '/' << spec.id << "_n" << cell.n << "_m" << cell.m << "_r" << rep
         << ".jsonl";
    std::ofstream file(name.str());
    if (!file) throw RunError("cannot write " + name.str());
    write_jsonl(file, record);
  }

  out.digest = digest_of(record);
  if (spec.process != ProcessKind::base) out.digest.post_convergence_empty.clear();
  return out;
}

CellStats aggregate_cell(const ExperimentSpec& spec, const Cell& cell,
                         std::span<const SweepRun> runs) {
  CellStats stats;
  stats.n = cell.n;
  stats.m = cell.m;
  stats.budget = cell.budget;
  stats.threshold = cell.threshold;
  stats.repetitions = static_cast<std::uint32_t>(runs.size());
  stats.success_kind = spec.success;
  stats.success_window = cell.window;

  std::vector<double> convergence_observed;
  std::vector<double> cover_observed;
  std::vector<double> min_progress_values;
  std::vector<double> max_loads;
  std::vector<double> mean_empties;
  std::vector<double> post_empty;
  std::vector<double> recovery_delays;

  for (const SweepRun& r : runs) {
    const RunDigest& d = r.digest;
    if (run_succeeds(spec, d, cell.window)) ++stats.success_count;
    if (d.convergence) {
      convergence_observed.push_back(static_cast<double>(*d.convergence));
    } else {
      ++stats.convergence_censored;
    }
    if (!d.initial_legitimate) {
      ++stats.not_initially_legitimate;
    } else if (d.stability_violation) {
      ++stats.stability_violations;
    }
    if (d.traced) {
      if (d.cover) {
        cover_observed.push_back(static_cast<double>(*d.cover));
      } else {
        ++stats.cover_censored;
      }
    }
    if (d.min_ball_progress) {
      min_progress_values.push_back(static_cast<double>(*d.min_ball_progress));
    }
    max_loads.push_back(static_cast<double>(d.max_load_overall));
    mean_empties.push_back(d.mean_empty_fraction);
    post_empty.insert(post_empty.end(), d.post_convergence_empty.begin(),
                      d.post_convergence_empty.end());
    stats.fault_events_total += d.fault_events.size();
    for (const FaultEvent& e : d.fault_events) {
      if (e.round + cell.window > d.rounds_executed) continue;
      ++stats.fault_events_evaluable;
      if (e.recovered_round && *e.recovered_round - e.round <= cell.window) {
        ++stats.fault_events_recovered_in_window;
        recovery_delays.push_back(static_cast<double>(*e.recovered_round - e.round));
      }
    }
  }

  stats.success = estimate_whp(stats.success_count, runs.size());
  stats.median_convergence =
      censored_median(convergence_observed, stats.convergence_censored);
  const std::uint64_t traced_runs = cover_observed.size() + stats.cover_censored;
  if (traced_runs > 0) {
    stats.median_cover = censored_median(cover_observed, stats.cover_censored);
  }
  if (!min_progress_values.empty()) {
    stats.median_min_progress = quantile(min_progress_values, 0.5);
  }
  stats.median_max_load = quantile(max_loads, 0.5);
  stats.median_mean_empty = quantile(mean_empties, 0.5);
  if (stats.median_convergence) {
    stats.convergence_over_n = *stats.median_convergence / static_cast<double>(cell.n);
  }
  if (stats.median_cover) {
    const double scale = static_cast<double>(cell.n) *
                         static_cast<double>(ceil_log2(cell.n)) *
                         static_cast<double>(ceil_log2(cell.n));
    stats.normalized_cover = *stats.median_cover / scale;
  }
  if (!post_empty.empty()) {
    for (const double q : {0.10, 0.25, 0.50, 0.75, 0.90}) {
      stats.empty_quantiles.push_back(quantile(post_empty, q));
    }
    std::uint64_t above = 0;
    for (const double e : post_empty) above += (e > 0.05);
    stats.empty_above_005 = static_cast<double>(above) / static_cast<double>(post_empty.size());
  }
  if (!recovery_delays.empty()) {
    stats.median_recovery = quantile(recovery_delays, 0.5);
  }

  std::vector<std::uint64_t> checkpoint_rounds = spec.checkpoints;
  std::sort(checkpoint_rounds.begin(), checkpoint_rounds.end());
  checkpoint_rounds.erase(std::unique(checkpoint_rounds.begin(), checkpoint_rounds.end()),
                          checkpoint_rounds.end());
  std::vector<std::pair<double, double>> fit_points;
  for (const std::uint64_t round : checkpoint_rounds) {
    std::vector<double> loads;
    std::vector<double> baseline_loads;
    std::uint64_t pairs = 0;
    std::uint64_t dominated = 0;
    for (const SweepRun& r : runs) {
      const auto find_round = [round](const auto& entries) {
        for (const auto& [cp_round, load] : entries) {
          if (cp_round == round) return std::optional<std::uint64_t>(load);
        }
        return std::optional<std::uint64_t>{};
      };
      const auto load = find_round(r.digest.checkpoint_loads);
      const auto base = find_round(r.baseline_checkpoints);
      if (load) loads.push_back(static_cast<double>(*load));
      if (base) baseline_loads.push_back(static_cast<double>(*base));
      if (load && base) {
        ++pairs;
        dominated += (*load >= *base);
      }
    }
    if (loads.empty()) continue;
    CheckpointStats cp;
    cp.round = round;
    cp.median_load = quantile(loads, 0.5);
    if (!baseline_loads.empty()) cp.median_baseline_load = quantile(baseline_loads, 0.5);
    if (pairs > 0) cp.dominance_fraction = static_cast<double>(dominated) / pairs;
    stats.checkpoints.push_back(cp);
    if (round > 0 && cp.median_load > 0.0) {
      fit_points.emplace_back(static_cast<double>(round), cp.median_load);
    }
  }
  if (fit_points.size() >= 3) {
    stats.checkpoint_fit = scaling_fit(fit_points);
  }
  return stats;
}

std::optional<ScalingFit> fit_vs_n(const std::vector<CellStats>& cells,
                                   std::optional<double> CellStats::*member) {
  std::vector<std::pair<double, double>> points;
  std::unordered_set<std::uint32_t> seen;
  for (const CellStats& cell : cells) {
    if (!(cell.*member)) return std::nullopt;
    if (!seen.insert(cell.n).second) return std::nullopt;
    points.emplace_back(static_cast<double>(cell.n), *(cell.*member));
  }
  if (points.size() < 3) return std::nullopt;
  for (const auto& [x, y] : points) {
    if (!(y > 0.0)) return std::nullopt;
  }
  return scaling_fit(points);
}

}  // namespace

SweepResult run_experiment(const ExperimentSpec& spec, unsigned workers,
                           const std::string& jsonl_dir) {
  if (spec.repetitions < 1) throw PreconditionError("repetitions must be at least 1");
  if (spec.n_values.empty()) throw PreconditionError("no n values given");

  std::vector<Cell> cells;
  const std::size_t m_count =
      spec.m_rule == MRuleKind::explicit_list ? spec.m_values.size() : 1;
  for (const std::uint32_t n : spec.n_values) {
    for (std::size_t mi = 0; mi < m_count; ++mi) {
      Cell cell;
      cell.n = n;
      cell.m = spec.resolve_m(n, mi);
      cell.budget = eval_round_expr(spec.rounds_expr, n);
      cell.window = eval_round_expr(spec.success_window_expr, n);
      cell.rule = spec.resolve_rule(n, cell.m);
      cell.threshold = cell.rule.threshold(n, cell.m);
      cells.push_back(cell);
    }
  }

  const std::uint64_t total = cells.size() * spec.repetitions;
  SweepResult result;
  result.spec = spec;
  result.runs.resize(total);

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t task = next.fetch_add(1);
      if (task >= total) break;
      try {
        const std::size_t ci = task / spec.repetitions;
        const auto rep = static_cast<std::uint32_t>(task % spec.repetitions);
        result.runs[task] = execute_task(spec, cells[ci], rep, jsonl_dir);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };

  const unsigned thread_count = std::max(
      1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(
              total, 0xffffffffULL))));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < thread_count; ++i) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const std::span<const SweepRun> cell_runs(result.runs.data() + ci * spec.repetitions,
                                              spec.repetitions);
    result.cells.push_back(aggregate_cell(spec, cells[ci], cell_runs));
  }
  result.convergence_fit = fit_vs_n(result.cells, &CellStats::median_convergence);
  result.cover_fit = fit_vs_n(result.cells, &CellStats::median_cover);
  return result;
}

namespace {

nlohmann::ordered_json json_optional(const std::optional<double>& value) {
  if (!value) return nullptr;
  return *value;
}

nlohmann::ordered_json json_fit(const std::optional<ScalingFit>& fit) {
  if (!fit) return nullptr;
  return nlohmann::ordered_json{{"exponent", fit->exponent},
                                {"intercept", fit->intercept},
                                {"max_rel_residual", fit->max_rel_residual}};
}

std::string describe_placement(const Placement& p) {
  switch (p.kind) {
    case Placement::Kind::one_per_node:
      return "spread";
    case Placement::Kind::all_in_one:
      return "point:" + std::to_string(p.target);
    case Placement::Kind::uniform_random:
      return "random";
    default:
      return "custom";
  }
}

}  // namespace

void write_summary_json(std::ostream& out, const SweepResult& result) {
  using json = nlohmann::ordered_json;
  const ExperimentSpec& spec = result.spec;
  json doc;
  doc["experiment"] = spec.id;
  doc["topology"] = spec.topology.describe();
  doc["process"] = to_string(spec.process);
  doc["strategy"] = to_string(spec.strategy);
  doc["placement"] = describe_placement(spec.placement);
  doc["rule"] = to_string(spec.rule.form);
  doc["alpha"] = spec.rule.alpha;
  doc["rounds"] = spec.rounds_expr;
  doc["repetitions"] = spec.repetitions;
  doc["master_seed"] = spec.master_seed;
  doc["trace"] = spec.trace;
  doc["faults"] = spec.faults.empty() ? json(nullptr) : json(spec.faults);
  doc["success"] = to_string(spec.success);
  doc["success_window"] = spec.success_window_expr;

  json cells = json::array();
  for (const CellStats& cell : result.cells) {
    json c;
    c["n"] = cell.n;
    c["m"] = cell.m;
    c["budget"] = cell.budget;
    c["threshold"] = cell.threshold;
    c["repetitions"] = cell.repetitions;
    c["success_count"] = cell.success_count;
    c["success_fraction"] = cell.success.fraction;
    c["success_lower"] = cell.success.lower;
    c["success_upper"] = cell.success.upper;
    c["convergence_censored"] = cell.convergence_censored;
    c["median_convergence"] = json_optional(cell.median_convergence);
    c["convergence_over_n"] = json_optional(cell.convergence_over_n);
    c["stability_violations"] = cell.stability_violations;
    c["not_initially_legitimate"] = cell.not_initially_legitimate;
    c["cover_censored"] = cell.cover_censored;
    c["median_cover"] = json_optional(cell.median_cover);
    c["normalized_cover"] = json_optional(cell.normalized_cover);
    c["median_min_progress"] = json_optional(cell.median_min_progress);
    c["median_max_load"] = cell.median_max_load;
    c["median_mean_empty"] = cell.median_mean_empty;
    if (!cell.empty_quantiles.empty()) {
      c["post_convergence_empty"] = {{"p10", cell.empty_quantiles[0]},
                                     {"p25", cell.empty_quantiles[1]},
                                     {"p50", cell.empty_quantiles[2]},
                                     {"p75", cell.empty_quantiles[3]},
                                     {"p90", cell.empty_quantiles[4]},
                                     {"fraction_above_0.05", cell.empty_above_005}};
    } else {
      c["post_convergence_empty"] = nullptr;
    }
    if (cell.fault_events_total > 0) {
      c["faults"] = {{"events", cell.fault_events_total},
                     {"evaluable", cell.fault_events_evaluable},
                     {"recovered_in_window", cell.fault_events_recovered_in_window},
                     {"median_recovery", json_optional(cell.median_recovery)},
                     {"window", cell.success_window}};
    } else {
      c["faults"] = nullptr;
    }
    if (!cell.checkpoints.empty()) {
      json checkpoints = json::array();
      for (const CheckpointStats& cp : cell.checkpoints) {
        json entry;
        entry["round"] = cp.round;
        entry["median_max_load"] = cp.median_load;
        entry["median_baseline_max_load"] =
            std::isnan(cp.median_baseline_load) ? json(nullptr)
                                                : json(cp.median_baseline_load);
        entry["dominance_fraction"] = std::isnan(cp.dominance_fraction)
                                          ? json(nullptr)
                                          : json(cp.dominance_fraction);
        checkpoints.push_back(entry);
      }
      c["checkpoints"] = checkpoints;
      c["checkpoint_fit"] = json_fit(cell.checkpoint_fit);
    } else {
      c["checkpoints"] = nullptr;
      c["checkpoint_fit"] = nullptr;
    }
    cells.push_back(c);
  }
  doc["cells"] = cells;
  doc["fits"] = {{"convergence", json_fit(result.convergence_fit)},
                 {"cover", json_fit(result.cover_fit)}};
  out << doc.dump(2) << '\n';
}

}  // namespace rbb
