#include "rbb/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "rbb/errors.hpp"

namespace rbb {

std::vector<std::uint32_t> memoryless_step(std::uint64_t m, std::uint32_t n, RngStream& r) {
  if (m < 1 || n < 1) throw PreconditionError("memoryless step needs m >= 1 and n >= 1");
  std::vector<std::uint32_t> loads(n, 0);
  for (std::uint64_t ball = 0; ball < m; ++ball) {
    ++loads[r.index(n)];
  }
  return loads;
}

RunRecord run_memoryless(std::uint32_t n, std::uint64_t m, const RunOptions& opts,
                         std::uint64_t seed) {
  if (n < 2) throw PreconditionError("memoryless run needs n >= 2");
  RunRngs rngs = RunRngs::from_seed(seed);
  const std::uint64_t threshold = opts.rule.threshold(n, m);

  RunRecord rec;
  rec.experiment_id = opts.experiment_id;
  rec.process = ProcessKind::memoryless;
  rec.seed = seed;
  rec.n = n;
  rec.m = m;
  rec.topology = "none";
  rec.strategy = "none";
  rec.rule = opts.rule;
  rec.threshold = threshold;
  rec.budget = opts.rounds;
  rec.stride = opts.stride != 0 ? opts.stride
               : opts.rounds <= 10000 ? 1
                                      : (opts.rounds + 9999) / 10000;
  rec.traced = false;
  rec.final_ball_count = m;

  double empty_sum = 0.0;
  for (std::uint64_t t = 0; t <= opts.rounds; ++t) {
    const std::vector<std::uint32_t> loads = memoryless_step(m, n, rngs.dest);
    std::uint64_t maxl = 0;
    std::uint64_t zeros = 0;
    std::uint64_t total = 0;
    for (const std::uint32_t load : loads) {
      maxl = std::max<std::uint64_t>(maxl, load);
      zeros += (load == 0);
      total += load;
    }
    const double empty = static_cast<double>(zeros) / n;
    const bool legit = maxl <= threshold;
    empty_sum += empty;
    if (maxl > rec.max_load_overall) rec.max_load_overall = maxl;
    if (legit && !rec.first_legitimate_round) rec.first_legitimate_round = t;
    if (!legit && !rec.first_violation_round) rec.first_violation_round = t;
    if (t == 0) rec.initial_legitimate = legit;
    if (t == 0 || t == opts.rounds || t % rec.stride == 0) {
      rec.samples.push_back(RoundSample{t, maxl, empty, legit, false});
      if (total != m) throw RunError("ball conservation violated", t);
    }
  }
  rec.rounds_executed = opts.rounds;
  rec.mean_empty_fraction = empty_sum / static_cast<double>(opts.rounds + 1);
  return rec;
}

std::vector<Move> dominating_step(Configuration& c, const Graph& g, Strategy strategy,
                                  RunRngs& rngs) {
  if (c.traced()) {
    throw PreconditionError("the dominating process runs on anonymous configurations");
  }
  for (std::uint32_t v = 0; v < c.node_count(); ++v) {
    if (c.load(v) == 0) c.add_ball(v);
  }
  Stepper stepper(g, strategy);
  return stepper.step(c, rngs);
}

RunRecord run_dominating(Configuration c0, const Graph& g, Strategy strategy,
                         const RunOptions& opts, RunRngs& rngs,
                         std::span<RoundObserver* const> observers) {
  RunOptions dominating_opts = opts;
  dominating_opts.process = ProcessKind::dominating;
  return run(std::move(c0), g, strategy, dominating_opts, rngs, observers);
}

std::optional<std::uint64_t> single_ball_cover_time(const Graph& g, std::uint32_t start,
                                                    RngStream& r, std::uint64_t max_rounds) {
  if (!g.is_connected()) throw PreconditionError("cover time needs a connected graph");
  if (start >= g.node_count()) throw PreconditionError("start node is out of range");
  const std::uint32_t n = g.node_count();
  std::vector<char> visited(n, 0);
  visited[start] = 1;
  std::uint32_t covered = 1;
  std::uint32_t v = start;
  std::uint64_t t = 0;
  while (covered < n) {
    if (t == max_rounds) return std::nullopt;
    ++t;
    v = g.sample_neighbor(v, r);
    if (!visited[v]) {
      visited[v] = 1;
      ++covered;
    }
  }
  return t;
}

double coupon_collector_mean(std::uint32_t n) {
  if (n < 2) throw PreconditionError("coupon-collector mean needs n >= 2");
  double harmonic = 0.0;
  for (std::uint32_t k = n - 1; k >= 1; --k) {
    harmonic += 1.0 / k;
  }
  return static_cast<double>(n - 1) * harmonic;
}

RunRecord run_single_ball(const Graph& g, std::uint32_t start, std::uint64_t budget,
                          std::uint64_t seed, const RunOptions& opts) {
  if (!g.is_connected()) throw PreconditionError("cover time needs a connected graph");
  if (start >= g.node_count()) throw PreconditionError("start node is out of range");
  const std::uint32_t n = g.node_count();
  RunRngs rngs = RunRngs::from_seed(seed);
  const std::uint64_t threshold = opts.rule.threshold(n, 1);

  RunRecord rec;
  rec.experiment_id = opts.experiment_id;
  rec.process = ProcessKind::single_ball;
  rec.seed = seed;
  rec.n = n;
  rec.m = 1;
  rec.topology = g.describe();
  rec.strategy = "none";
  rec.rule = opts.rule;
  rec.threshold = threshold;
  rec.budget = budget;
  rec.stride = opts.stride != 0 ? opts.stride
               : budget <= 10000 ? 1
                                 : (budget + 9999) / 10000;
  rec.traced = true;
  rec.max_load_overall = 1;
  rec.mean_empty_fraction = static_cast<double>(n - 1) / n;
  rec.final_ball_count = 1;
  rec.initial_legitimate = true;
  rec.first_legitimate_round = 0;

  const double empty = static_cast<double>(n - 1) / n;
  rec.samples.push_back(RoundSample{0, 1, empty, true, false});

  std::vector<char> visited(n, 0);
  visited[start] = 1;
  std::uint32_t covered = 1;
  std::uint32_t v = start;
  std::uint64_t t = 0;
  while (covered < n && t < budget) {
    ++t;
    v = g.sample_neighbor(v, rngs.dest);
    if (!visited[v]) {
      visited[v] = 1;
      ++covered;
      if (covered == n) rec.cover_time = t;
    }
    if (t % rec.stride == 0 || covered == n || t == budget) {
      rec.samples.push_back(RoundSample{t, 1, empty, true, false});
    }
  }
  rec.rounds_executed = t;

  BallSummary ball;
  ball.progress_total = t;
  ball.cover_round = rec.cover_time;
  rec.ball_progress.push_back(std::move(ball));
  return rec;
}

}  // namespace rbb
