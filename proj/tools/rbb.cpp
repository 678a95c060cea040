#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "rbb/adversary.hpp"
#include "rbb/baselines.hpp"
#include "rbb/errors.hpp"
#include "rbb/experiments.hpp"
#include "rbb/expr.hpp"
#include "rbb/metrics.hpp"
#include "rbb/presets.hpp"
#include "rbb/process.hpp"
#include "rbb/rng.hpp"
#include "rbb/version.hpp"

namespace fs = std::filesystem;
using namespace rbb;

namespace {

std::string format_real(double value, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

void print_banner(const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& config) {
  std::cout << "rbb " << kVersion << " " << command << '\n';
  for (const auto& [key, value] : config) {
    std::cout << "  " << key << " = " << value << '\n';
  }
}

std::uint32_t checked_n(std::uint64_t n) {
  if (n < 2 || n > 0xffffffffULL) throw PreconditionError("n must lie in [2, 2^32)");
  return static_cast<std::uint32_t>(n);
}

Placement parse_placement_flag(const std::string& text) {
  if (text == "spread") return Placement::one_per_node();
  if (text == "random") return Placement::uniform_random();
  if (text.rfind("point:", 0) == 0) {
    const std::string digits = text.substr(6);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos ||
        digits.size() > 9) {
      throw PlacementError("bad node index in placement '" + text + "'");
    }
    return Placement::all_in_one(static_cast<std::uint32_t>(std::stoul(digits)));
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    std::ifstream in(path);
    if (!in) throw PlacementError("cannot open placement file: " + path);
    std::vector<std::uint64_t> counts;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream fields(line);
      std::string token;
      while (fields >> token) {
        if (token.find_first_not_of("0123456789") != std::string::npos || token.size() > 19) {
          throw PlacementError("line " + std::to_string(line_no) +
                               ": bad ball count '" + token + "' in " + path);
        }
        counts.push_back(std::stoull(token));
      }
    }
    return Placement::custom(std::move(counts));
  }
  throw PlacementError("unknown placement '" + text +
                       "' (expected spread, point:<idx>, random or file:<path>)");
}

std::string describe_placement_flag(const Placement& p) {
  switch (p.kind) {
    case Placement::Kind::one_per_node:
      return "spread";
    case Placement::Kind::all_in_one:
      return "point:" + std::to_string(p.target);
    case Placement::Kind::uniform_random:
      return "random";
    default:
      return "custom[" + std::to_string(p.counts.size()) + " nodes]";
  }
}

LegitimacyRule make_rule(const std::string& form, double alpha, std::uint64_t n,
                         std::uint64_t m) {
  LegitimacyRule rule;
  rule.alpha = alpha;
  if (form.empty()) {
    rule.form = (m == n) ? LegitimacyRule::Form::balanced : LegitimacyRule::Form::scaled;
  } else {
    rule.form = parse_rule_form(form);
  }
  return rule;
}

void append_results(const std::string& path, const RunDigest& digest) {
  bool has_header = false;
  if (fs::exists(path) && fs::file_size(path) > 0) {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != results_csv_header()) {
      throw ParseError("results schema mismatch in " + path);
    }
    has_header = true;
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw RunError("cannot write " + path);
  if (!has_header) out << results_csv_header() << '\n';
  write_results_row(out, digest);
}

void write_run_files(const std::string& out_dir, const RunRecord& record) {
  fs::create_directories(out_dir);
  const std::string jsonl_path = out_dir + "/run.jsonl";
  const std::string csv_path = out_dir + "/run.csv";
  std::ofstream jsonl(jsonl_path);
  if (!jsonl) throw RunError("cannot write " + jsonl_path);
  write_jsonl(jsonl, record);
  std::ofstream csv(csv_path);
  if (!csv) throw RunError("cannot write " + csv_path);
  write_round_csv(csv, record);
  append_results(out_dir + "/summary.csv", digest_of(record));
}

void print_run_outcome(const std::string& out_dir, const RunRecord& record) {
  const RunDigest d = digest_of(record);
  std::cout << "rounds executed: " << d.rounds_executed << '\n';
  std::cout << "max load overall: " << d.max_load_overall << '\n';
  std::cout << "mean empty fraction: " << format_real(d.mean_empty_fraction) << '\n';
  std::cout << "threshold: " << d.threshold << " (" << to_string(d.rule.form)
            << ", alpha " << format_real(d.rule.alpha, "%g") << ")\n";
  if (d.convergence) {
    std::cout << "convergence time: " << *d.convergence << '\n';
  } else {
    std::cout << "convergence time: censored at " << d.budget << '\n';
  }
  if (d.initial_legitimate) {
    if (d.stability_violation) {
      std::cout << "stability horizon: " << *d.stability_violation << '\n';
    } else {
      std::cout << "stability horizon: censored at " << d.budget << " (no violation)\n";
    }
  }
  if (d.traced) {
    if (d.cover) {
      std::cout << "parallel cover time: " << *d.cover << '\n';
    } else {
      std::cout << "parallel cover time: censored at " << d.budget << '\n';
    }
    if (d.min_ball_progress) {
      std::cout << "min ball progress: " << *d.min_ball_progress << '\n';
    }
  }
  for (const FaultEvent& e : d.fault_events) {
    std::cout << "fault at round " << e.round << ": ";
    if (e.recovered_round) {
      std::cout << "recovered at " << *e.recovered_round << '\n';
    } else {
      std::cout << "not recovered within budget\n";
    }
  }
  std::cout << "wrote " << out_dir << "/run.jsonl, " << out_dir << "/run.csv, " << out_dir
            << "/summary.csv\n";
}

struct SimulateOpts {
  std::string topology = "complete";
  std::uint64_t n = 0;
  std::string m_expr = "n";
  std::string strategy = "fifo";
  std::string placement = "spread";
  std::string rounds_expr = "n";
  double alpha = 4.0;
  std::string rule;
  std::uint64_t seed = 1;
  bool trace = false;
  std::string faults;
  std::string out = "rbb_out";
};

int cmd_simulate(const SimulateOpts& o) {
  const std::uint32_t n = checked_n(o.n);
  const TopologySpec tspec = TopologySpec::parse(o.topology);
  const std::uint64_t m = eval_round_expr(o.m_expr, n);
  if (m < 1) throw PlacementError("m must be at least 1");
  const std::uint64_t rounds = eval_round_expr(o.rounds_expr, n);
  const Strategy strategy = parse_strategy(o.strategy);
  const Placement placement = parse_placement_flag(o.placement);
  const LegitimacyRule rule = make_rule(o.rule, o.alpha, n, m);
  if (!o.faults.empty()) FaultSchedule::parse(o.faults, n);

  print_banner("simulate",
               {{"topology", tspec.describe()},
                {"n", std::to_string(n)},
                {"m", std::to_string(m)},
                {"strategy", to_string(strategy)},
                {"placement", describe_placement_flag(placement)},
                {"rounds", std::to_string(rounds)},
                {"rule", to_string(rule.form)},
                {"alpha", format_real(rule.alpha, "%g")},
                {"threshold", std::to_string(rule.threshold(n, m))},
                {"seed", std::to_string(o.seed)},
                {"trace", o.trace ? "true" : "false"},
                {"faults", o.faults.empty() ? "none" : o.faults},
                {"out", o.out}});

  const Graph g = tspec.build(n, RunRngs::graph_seed(o.seed));
  RunOptions opts;
  opts.rounds = rounds;
  opts.rule = rule;
  opts.experiment_id = "simulate";
  opts.seed = o.seed;
  RunRngs rngs = RunRngs::from_seed(o.seed);
  Configuration c0 = init_config(g, m, placement, o.trace ? Mode::traced : Mode::anonymous,
                                 rngs.order);
  RunRecord record;
  if (!o.faults.empty()) {
    const FaultSchedule schedule = FaultSchedule::parse(o.faults, n);
    record = faulty_run(std::move(c0), g, strategy, opts, schedule, rngs);
  } else {
    record = run(std::move(c0), g, strategy, opts, rngs);
  }
  write_run_files(o.out, record);
  print_run_outcome(o.out, record);
  return 0;
}

struct SweepOpts {
  std::string config;
  std::string preset;
  std::string out = "rbb_out";
  unsigned workers = 1;
  bool force = false;
};

int cmd_sweep(const SweepOpts& o) {
  std::vector<ExperimentSpec> specs;
  std::string source;
  if (!o.preset.empty()) {
    if (!o.config.empty()) {
      throw ParseError("give either a config file or --preset, not both");
    }
    const Preset* preset = find_preset(o.preset);
    if (!preset) throw ParseError("unknown preset '" + o.preset + "'");
    std::istringstream in(preset->text);
    specs = parse_experiment_config(in);
    source = "preset:" + o.preset;
  } else if (!o.config.empty()) {
    specs = load_experiment_config(o.config);
    source = o.config;
  } else {
    throw ParseError("a config file or --preset is required");
  }
  if (specs.empty()) throw ParseError("no experiments defined");

  print_banner("sweep", {{"source", source},
                         {"out", o.out},
                         {"workers", std::to_string(o.workers)},
                         {"experiments", std::to_string(specs.size())},
                         {"force", o.force ? "true" : "false"}});

  fs::create_directories(o.out);
  const std::string results_path = o.out + "/results.csv";
  std::unordered_set<std::string> done;
  bool resume = !o.force && fs::exists(results_path) && fs::file_size(results_path) > 0;
  if (resume) {
    std::ifstream in(results_path);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != results_csv_header()) {
      throw ParseError("results schema mismatch in " + results_path);
    }
    while (std::getline(in, line)) {
      const std::size_t comma = line.find(',');
      if (comma != std::string::npos) done.insert(line.substr(0, comma));
    }
  }
  std::ofstream results(results_path, resume ? std::ios::app : std::ios::trunc);
  if (!results) throw RunError("cannot write " + results_path);
  if (!resume) results << results_csv_header() << '\n';

  for (const ExperimentSpec& spec : specs) {
    if (done.count(spec.id)) {
      std::cout << spec.id << ": skipped (already in results.csv)\n";
      continue;
    }
    const SweepResult result = run_experiment(spec, o.workers, o.out);
    for (const SweepRun& r : result.runs) write_results_row(results, r.digest);
    results.flush();
    const std::string summary_path = o.out + "/summary_" + spec.id + ".json";
    std::ofstream summary(summary_path);
    if (!summary) throw RunError("cannot write " + summary_path);
    write_summary_json(summary, result);
    std::cout << spec.id << ": " << result.runs.size() << " runs across "
              << result.cells.size() << " cells\n";
    for (const CellStats& cell : result.cells) {
      std::cout << "  n " << cell.n << ", m " << cell.m << ": " << to_string(cell.success_kind)
                << " " << cell.success_count << "/" << cell.repetitions << " ["
                << format_real(cell.success.lower, "%.4f") << ", "
                << format_real(cell.success.upper, "%.4f") << "]\n";
    }
  }
  std::cout << "wrote " << results_path << '\n';
  return 0;
}

struct BaselineOpts {
  std::string process = "memoryless";
  std::string topology = "complete";
  std::uint64_t n = 0;
  std::string m_expr = "n";
  std::string rounds_expr = "n";
  std::string strategy = "fifo";
  std::string placement = "spread";
  std::uint64_t seed = 1;
  std::uint64_t start = 0;
  std::string out = "rbb_out";
};

int cmd_baseline(const BaselineOpts& o) {
  const std::uint32_t n = checked_n(o.n);
  const ProcessKind kind = parse_process(o.process);
  if (kind == ProcessKind::base) {
    throw ParseError("--process must be memoryless, dominating or single_ball");
  }
  const std::uint64_t m = kind == ProcessKind::single_ball ? 1 : eval_round_expr(o.m_expr, n);
  if (m < 1) throw PlacementError("m must be at least 1");
  const std::uint64_t rounds = eval_round_expr(o.rounds_expr, n);
  const TopologySpec tspec = TopologySpec::parse(o.topology);

  print_banner("baseline", {{"process", to_string(kind)},
                            {"topology", kind == ProcessKind::memoryless
                                             ? std::string("none")
                                             : tspec.describe()},
                            {"n", std::to_string(n)},
                            {"m", std::to_string(m)},
                            {"rounds", std::to_string(rounds)},
                            {"seed", std::to_string(o.seed)},
                            {"out", o.out}});

  RunOptions opts;
  opts.rounds = rounds;
  opts.rule = make_rule("", 4.0, n, m);
  opts.experiment_id = "baseline";
  opts.seed = o.seed;
  RunRecord record;
  switch (kind) {
    case ProcessKind::memoryless:
      record = run_memoryless(n, m, opts, o.seed);
      break;
    case ProcessKind::single_ball: {
      const Graph g = tspec.build(n, RunRngs::graph_seed(o.seed));
      if (o.start >= n) throw PreconditionError("start node out of range");
      record = run_single_ball(g, static_cast<std::uint32_t>(o.start), rounds, o.seed, opts);
      break;
    }
    default: {
      const Graph g = tspec.build(n, RunRngs::graph_seed(o.seed));
      RunRngs rngs = RunRngs::from_seed(o.seed);
      Configuration c0 = init_config(g, m, parse_placement_flag(o.placement),
                                     Mode::anonymous, rngs.order);
      opts.process = ProcessKind::dominating;
      record = run(std::move(c0), g, parse_strategy(o.strategy), opts, rngs);
      break;
    }
  }
  write_run_files(o.out, record);
  print_run_outcome(o.out, record);
  if (kind == ProcessKind::dominating) {
    std::cout << "final ball count: " << record.final_ball_count << '\n';
  }
  return 0;
}

struct CoverOpts {
  std::string topology = "complete";
  std::uint64_t n = 0;
  std::uint32_t runs = 100;
  std::uint64_t seed = 1;
  std::uint64_t start = 0;
  std::string csv;
};

int cmd_cover(const CoverOpts& o) {
  const std::uint32_t n = checked_n(o.n);
  if (o.runs < 1) throw PreconditionError("at least one run is required");
  const TopologySpec tspec = TopologySpec::parse(o.topology);
  print_banner("cover", {{"topology", tspec.describe()},
                         {"n", std::to_string(n)},
                         {"runs", std::to_string(o.runs)},
                         {"seed", std::to_string(o.seed)},
                         {"start", std::to_string(o.start)}});
  const Graph g = tspec.build(n, RunRngs::graph_seed(o.seed));
  if (o.start >= n) throw PreconditionError("start node out of range");
  std::vector<double> values;
  values.reserve(o.runs);
  for (std::uint32_t rep = 0; rep < o.runs; ++rep) {
    const std::uint64_t rep_seed = derive_seed(o.seed, "cover", n, 1, rep);
    RunRngs rngs = RunRngs::from_seed(rep_seed);
    const auto cover =
        single_ball_cover_time(g, static_cast<std::uint32_t>(o.start), rngs.dest);
    values.push_back(static_cast<double>(*cover));
  }
  double mean = 0.0;
  double lo = values.front();
  double hi = values.front();
  for (const double v : values) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(values.size());
  std::cout << "runs: " << o.runs << '\n';
  std::cout << "mean cover time: " << format_real(mean, "%.3f") << '\n';
  std::cout << "median cover time: " << format_real(quantile(values, 0.5), "%.1f") << '\n';
  std::cout << "min: " << format_real(lo, "%.0f") << "  max: " << format_real(hi, "%.0f")
            << '\n';
  if (tspec.kind == TopologyKind::complete) {
    const double analytic = coupon_collector_mean(n);
    std::cout << "analytic mean: " << format_real(analytic, "%.3f") << '\n';
    std::cout << "relative error: " << format_real(mean / analytic - 1.0, "%+.4f") << '\n';
  }
  if (!o.csv.empty()) {
    std::ofstream out(o.csv);
    if (!out) throw RunError("cannot write " + o.csv);
    out << "run,cover_time\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      out << i << ',' << static_cast<std::uint64_t>(values[i]) << '\n';
    }
    std::cout << "wrote " << o.csv << '\n';
  }
  return 0;
}

struct PresetsOpts {
  std::string show;
  std::string write_dir;
};

int cmd_presets(const PresetsOpts& o) {
  if (!o.show.empty()) {
    const Preset* preset = find_preset(o.show);
    if (!preset) throw ParseError("unknown preset '" + o.show + "'");
    std::cout << preset->text;
    return 0;
  }
  if (!o.write_dir.empty()) {
    fs::create_directories(o.write_dir);
    for (const Preset& preset : shipped_presets()) {
      const std::string path = o.write_dir + "/" + preset.name + ".cfg";
      std::ofstream out(path);
      if (!out) throw RunError("cannot write " + path);
      out << preset.text;
    }
    std::cout << "wrote " << shipped_presets().size() << " preset configs to " << o.write_dir
              << '\n';
    return 0;
  }
  for (const Preset& preset : shipped_presets()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-26s %s", preset.name, preset.description);
    std::cout << buf << '\n';
  }
  return 0;
}

struct ResultRow {
  std::string experiment;
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::optional<double> convergence;
  bool convergence_censored = false;
  std::optional<double> stability;
  bool stability_censored = false;
  std::optional<double> cover;
  bool cover_censored = false;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_field_real(const std::string& text, std::uint64_t line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParseError("bad numeric field '" + text + "'", line_no);
  }
}

int cmd_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open results file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("results schema mismatch in " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != results_csv_header()) throw ParseError("results schema mismatch in " + path);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<ResultRow>> groups;
  std::string line;
  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 17) {
      throw ParseError("expected 17 fields, got " + std::to_string(f.size()), line_no);
    }
    ResultRow row;
    row.experiment = f[0];
    row.n = static_cast<std::uint32_t>(parse_field_real(f[2], line_no));
    row.m = static_cast<std::uint64_t>(parse_field_real(f[3], line_no));
    if (!f[7].empty()) {
      row.convergence = parse_field_real(f[7], line_no);
      row.convergence_censored = f[8] == "1";
    }
    if (!f[9].empty()) {
      row.stability = parse_field_real(f[9], line_no);
      row.stability_censored = f[10] == "1";
    }
    if (!f[11].empty()) {
      row.cover = parse_field_real(f[11], line_no);
      row.cover_censored = f[12] == "1";
    }
    if (!groups.count(row.experiment)) order.push_back(row.experiment);
    groups[row.experiment].push_back(row);
  }
  if (order.empty()) {
    std::cout << "no runs\n";
    return 0;
  }

  for (const std::string& id : order) {
    const std::vector<ResultRow>& rows = groups[id];
    std::uint64_t converged = 0;
    std::vector<double> conv_observed;
    std::uint64_t conv_censored = 0;
    std::vector<double> stab_observed;
    std::uint64_t stab_censored = 0;
    std::vector<double> cover_observed;
    std::uint64_t cover_censored = 0;
    std::unordered_map<std::uint32_t, std::pair<std::vector<double>, std::uint64_t>> by_n;
    for (const ResultRow& row : rows) {
      if (row.convergence && !row.convergence_censored) {
        ++converged;
        conv_observed.push_back(*row.convergence);
        by_n[row.n].first.push_back(*row.convergence);
      } else if (row.convergence) {
        ++conv_censored;
        ++by_n[row.n].second;
      }
      if (row.stability) {
        if (row.stability_censored) {
          ++stab_censored;
        } else {
          stab_observed.push_back(*row.stability);
        }
      }
      if (row.cover) {
        if (row.cover_censored) {
          ++cover_censored;
        } else {
          cover_observed.push_back(*row.cover);
        }
      }
    }

    const WhpEstimate success = estimate_whp(converged, rows.size());
    std::cout << id << ": " << rows.size() << " runs\n";
    char buf[200];
    std::snprintf(buf, sizeof(buf), "  converged %llu/%zu  fraction %.4f [%.4f, %.4f]",
                  static_cast<unsigned long long>(converged), rows.size(), success.fraction,
                  success.lower, success.upper);
    std::cout << buf << '\n';
    const auto print_median = [&](const char* label, const std::vector<double>& observed,
                                  std::uint64_t censored) {
      if (observed.empty() && censored == 0) return;
      const auto median = censored_median(observed, censored);
      if (median) {
        std::snprintf(buf, sizeof(buf), "  median %s %.1f (%llu censored)", label,
                      *median, static_cast<unsigned long long>(censored));
      } else {
        std::snprintf(buf, sizeof(buf), "  median %s beyond budget (%llu censored)", label,
                      static_cast<unsigned long long>(censored));
      }
      std::cout << buf << '\n';
    };
    print_median("convergence time", conv_observed, conv_censored);
    print_median("stability horizon", stab_observed, stab_censored);
    print_median("cover time", cover_observed, cover_censored);

    std::vector<std::pair<double, double>> points;
    bool fit_ok = by_n.size() >= 3;
    if (fit_ok) {
      for (const auto& [n, data] : by_n) {
        const auto median = censored_median(data.first, data.second);
        if (!median || !(*median > 0.0)) {
          fit_ok = false;
          break;
        }
        points.emplace_back(static_cast<double>(n), *median);
      }
    }
    if (fit_ok) {
      const ScalingFit fit = scaling_fit(points);
      std::snprintf(buf, sizeof(buf),
                    "  convergence scaling: exponent %.4f (max residual %.4f)", fit.exponent,
                    fit.max_rel_residual);
      std::cout << buf << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repeated balls-into-bins simulation laboratory"};
  app.set_version_flag("--version", std::string("rbb ") + kVersion);
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run one seeded trajectory");
  simulate->add_option("--topology", sim.topology,
                       "complete, ring, regular:<d> or file:<path>")
      ->capture_default_str();
  simulate->add_option("--n", sim.n, "number of nodes")->required();
  simulate->add_option("--m", sim.m_expr, "ball count (integer or expression in n)")
      ->capture_default_str();
  simulate->add_option("--strategy", sim.strategy, "fifo, lifo or random")
      ->capture_default_str();
  simulate->add_option("--placement", sim.placement,
                       "spread, point:<idx>, random or file:<path>")
      ->capture_default_str();
  simulate->add_option("--rounds", sim.rounds_expr, "round budget (integer or expression)")
      ->capture_default_str();
  simulate->add_option("--alpha", sim.alpha, "legitimacy threshold constant")
      ->capture_default_str();
  simulate->add_option("--rule", sim.rule, "balanced, scaled or additive");
  simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate->add_flag("--trace", sim.trace, "track per-ball visits and progress");
  simulate->add_option("--faults", sim.faults,
                       "fault schedule, e.g. periodic:8n:all_in_one:0");
  simulate->add_option("--out", sim.out, "output directory")->capture_default_str();

  SweepOpts sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a declarative experiment config");
  sweep_cmd->add_option("config", sweep.config, "experiment config file");
  sweep_cmd->add_option("--preset", sweep.preset, "shipped preset name");
  sweep_cmd->add_option("--out", sweep.out, "output directory")->capture_default_str();
  sweep_cmd->add_option("--workers", sweep.workers, "worker thread count")
      ->capture_default_str();
  sweep_cmd->add_flag("--force", sweep.force, "rerun experiments already in results.csv");

  BaselineOpts baseline;
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "run a comparison process (memoryless, dominating, "
                                     "single_ball)");
  baseline_cmd->add_option("--process", baseline.process,
                           "memoryless, dominating or single_ball")
      ->capture_default_str();
  baseline_cmd->add_option("--topology", baseline.topology, "graph for graph-based processes")
      ->capture_default_str();
  baseline_cmd->add_option("--n", baseline.n, "number of nodes")->required();
  baseline_cmd->add_option("--m", baseline.m_expr, "ball count (integer or expression)")
      ->capture_default_str();
  baseline_cmd->add_option("--rounds", baseline.rounds_expr, "round budget")
      ->capture_default_str();
  baseline_cmd->add_option("--strategy", baseline.strategy, "selection strategy (dominating)")
      ->capture_default_str();
  baseline_cmd->add_option("--placement", baseline.placement, "initial placement (dominating)")
      ->capture_default_str();
  baseline_cmd->add_option("--seed", baseline.seed, "master seed")->capture_default_str();
  baseline_cmd->add_option("--start", baseline.start, "start node (single_ball)")
      ->capture_default_str();
  baseline_cmd->add_option("--out", baseline.out, "output directory")->capture_default_str();

  CoverOpts cover;
  CLI::App* cover_cmd =
      app.add_subcommand("cover", "estimate single-ball cover time over repeated runs");
  cover_cmd->add_option("--topology", cover.topology, "graph kind")->capture_default_str();
  cover_cmd->add_option("--n", cover.n, "number of nodes")->required();
  cover_cmd->add_option("--runs", cover.runs, "number of independent runs")
      ->capture_default_str();
  cover_cmd->add_option("--seed", cover.seed, "master seed")->capture_default_str();
  cover_cmd->add_option("--start", cover.start, "start node")->capture_default_str();
  cover_cmd->add_option("--csv", cover.csv, "write per-run cover times to this file");

  PresetsOpts presets;
  CLI::App* presets_cmd = app.add_subcommand("presets", "list or export shipped experiments");
  presets_cmd->add_option("--show", presets.show, "print one preset config");
  presets_cmd->add_option("--write", presets.write_dir, "write all preset configs to a directory");

  std::string report_path;
  CLI::App* report_cmd = app.add_subcommand("report", "summarize a results CSV");
  report_cmd->add_option("results", report_path, "results.csv produced by sweep")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (baseline_cmd->parsed()) return cmd_baseline(baseline);
    if (cover_cmd->parsed()) return cmd_cover(cover);
    if (presets_cmd->parsed()) return cmd_presets(presets);
    if (report_cmd->parsed()) return cmd_report(report_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const TopologyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PlacementError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FaultSpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const TracingRequiredError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
