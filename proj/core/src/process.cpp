#include "rbb/process.hpp"

#include <algorithm>
#include <exception>

#include "rbb/adversary.hpp"
#include "rbb/errors.hpp"

namespace rbb {

void LoadStats::refresh(const Configuration& c) {
  counts_.assign(16, 0);
  max_ = 0;
  for (std::uint32_t v = 0; v < c.node_count(); ++v) {
    const std::uint32_t load = c.load(v);
    if (load >= counts_.size()) counts_.resize(static_cast<std::size_t>(load) + 1, 0);
    ++counts_[load];
    if (load > max_) max_ = load;
  }
}

Stepper::Stepper(const Graph& g, Strategy strategy, ArrivalOrder arrival)
    : g_(&g), strategy_(strategy), arrival_(arrival) {}

const std::vector<Move>& Stepper::step(Configuration& c, RunRngs& rngs, LoadStats* stats) {
  if (c.node_count() != g_->node_count()) {
    throw PreconditionError("configuration and graph disagree on the node count");
  }
  moves_.clear();
  if (c.traced()) {
    step_traced(c, rngs, stats);
  } else {
    step_anonymous(c, rngs, stats);
  }
  ++c.round_;
  return moves_;
}

void Stepper::step_anonymous(Configuration& c, RunRngs& rngs, LoadStats* stats) {
  const std::uint32_t n = c.n_;
  auto& loads = c.loads_;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (loads[v] == 0) continue;
    const std::uint32_t d = g_->sample_neighbor(v, rngs.dest);
    moves_.push_back(Move{v, d, kNoBall});
  }
  for (const Move& mv : moves_) {
    if (stats) stats->on_departure(loads[mv.source]);
    --loads[mv.source];
  }
  for (const Move& mv : moves_) {
    ++loads[mv.dest];
    if (stats) stats->on_arrival(loads[mv.dest]);
  }
}

void Stepper::step_traced(Configuration& c, RunRngs& rngs, LoadStats* stats) {
  const std::uint32_t n = c.n_;
  const std::uint64_t next_round = c.round_ + 1;
  if (buckets_.size() < n) buckets_.resize(n);

  for (std::uint32_t v = 0; v < n; ++v) {
    auto& q = c.queues_[v];
    if (q.empty()) continue;
    const std::uint32_t d = g_->sample_neighbor(v, rngs.dest);
    std::uint32_t ball;
    switch (strategy_) {
      case Strategy::fifo:
        ball = q.front();
        q.pop_front();
        break;
      case Strategy::lifo:
        ball = q.back();
        q.pop_back();
        break;
      default: {
        const auto k = static_cast<std::ptrdiff_t>(rngs.order.index(q.size()));
        ball = q[static_cast<std::size_t>(k)];
        q.erase(q.begin() + k);
        break;
      }
    }
    if (stats) stats->on_departure(c.loads_[v]);
    --c.loads_[v];
    BallTrace& tr = c.traces_[ball];
    ++tr.progress_total;
    if (tr.events_recorded) tr.progress_rounds.push_back(next_round);
    moves_.push_back(Move{v, d, ball});
  }

  touched_.clear();
  for (const Move& mv : moves_) {
    auto& bucket = buckets_[mv.dest];
    if (bucket.empty()) touched_.push_back(mv.dest);
    bucket.push_back(mv.ball);
  }
  std::sort(touched_.begin(), touched_.end());
  for (const std::uint32_t d : touched_) {
    auto& bucket = buckets_[d];
    if (arrival_ == ArrivalOrder::shuffled) {
      for (std::size_t i = bucket.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rngs.order.index(i + 1));
        std::swap(bucket[i], bucket[j]);
      }
    }
    for (const std::uint32_t ball : bucket) {
      c.queues_[d].push_back(ball);
      ++c.loads_[d];
      if (stats) stats->on_arrival(c.loads_[d]);
      BallTrace& tr = c.traces_[ball];
      if (!tr.visited[d]) {
        tr.visited[d] = true;
        if (++tr.visited_count == n) {
          tr.cover_round = next_round;
          ++c.covered_count_;
        }
      }
    }
    bucket.clear();
  }
}

std::vector<Move> step(Configuration& c, const Graph& g, Strategy strategy, RunRngs& rngs) {
  Stepper stepper(g, strategy);
  return stepper.step(c, rngs);
}

namespace {

RunRecord run_impl(Configuration c, const Graph& g, Strategy strategy, const RunOptions& opts,
                   const FaultSchedule* schedule, RunRngs& rngs,
                   std::span<RoundObserver* const> observers) {
  if (opts.process != ProcessKind::base && opts.process != ProcessKind::dominating) {
    throw PreconditionError("run drives the base or dominating process");
  }
  if (opts.process == ProcessKind::dominating && c.traced()) {
    throw PreconditionError("the dominating process runs on anonymous configurations");
  }
  if (schedule) schedule->validate();

  const std::uint32_t n = c.node_count();
  const std::uint64_t initial_m = c.ball_count();
  const std::uint64_t threshold = opts.rule.threshold(n, initial_m);

  RunRecord rec;
  rec.experiment_id = opts.experiment_id;
  rec.process = opts.process;
  rec.seed = opts.seed;
  rec.n = n;
  rec.m = initial_m;
  rec.topology = g.describe();
  rec.strategy = to_string(strategy);
  rec.rule = opts.rule;
  rec.threshold = threshold;
  rec.budget = opts.rounds;
  rec.stride = opts.stride != 0 ? opts.stride
               : opts.rounds <= 10000 ? 1
                                      : (opts.rounds + 9999) / 10000;
  rec.traced = c.traced();

  std::vector<std::uint64_t> checkpoints = opts.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  std::size_t next_checkpoint = 0;

  Stepper stepper(g, strategy, opts.arrival_order);
  LoadStats stats(c);

  std::uint64_t maxl = stats.max_load();
  double empty = static_cast<double>(stats.empty_count()) / n;
  bool legit = maxl <= threshold;
  rec.initial_legitimate = legit;
  if (legit) {
    rec.first_legitimate_round = 0;
  } else {
    rec.first_violation_round = 0;
  }
  rec.max_load_overall = maxl;
  double empty_sum = empty;
  rec.samples.reserve(static_cast<std::size_t>(
      std::min<std::uint64_t>(opts.rounds / rec.stride + 4, 20000)));
  rec.samples.push_back(RoundSample{0, maxl, empty, legit, false});
  while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == 0) {
    rec.checkpoint_loads.emplace_back(0, maxl);
    ++next_checkpoint;
  }

  for (RoundObserver* obs : observers) {
    try {
      obs->on_init(c);
    } catch (const std::exception& e) {
      throw RunError(e.what(), 0);
    }
  }

  std::size_t first_unrecovered = 0;
  bool stopped = false;
  while (c.round() < opts.rounds && !stopped) {
    const std::uint64_t t = c.round() + 1;
    bool fault = false;
    if (schedule && schedule->fires(t, rngs.fault)) {
      apply_fault(c, schedule->policy, rngs.fault);
      stats.refresh(c);
      rec.fault_events.push_back(FaultEvent{t, std::nullopt});
      fault = true;
    }
    if (opts.process == ProcessKind::dominating) {
      for (std::uint32_t v = 0; v < n; ++v) {
        if (c.load(v) == 0) {
          c.add_ball(v);
          stats.on_arrival(1);
        }
      }
    }
    const std::vector<Move>& moves = stepper.step(c, rngs, &stats);

    maxl = stats.max_load();
    empty = static_cast<double>(stats.empty_count()) / n;
    legit = maxl <= threshold;
    empty_sum += empty;
    if (maxl > rec.max_load_overall) rec.max_load_overall = maxl;
    if (legit && !rec.first_legitimate_round) rec.first_legitimate_round = t;
    if (!legit && !rec.first_violation_round) rec.first_violation_round = t;
    if (legit) {
      while (first_unrecovered < rec.fault_events.size()) {
        rec.fault_events[first_unrecovered++].recovered_round = t;
      }
    }
    if (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == t) {
      rec.checkpoint_loads.emplace_back(t, maxl);
      ++next_checkpoint;
    }
    if (rec.traced && !rec.cover_time && c.covered_count() == c.ball_count()) {
      rec.cover_time = t;
    }

    for (RoundObserver* obs : observers) {
      try {
        obs->on_round(c, moves, fault);
      } catch (const std::exception& e) {
        throw RunError(e.what(), t);
      }
      if (obs->stop_requested()) stopped = true;
    }

    if (fault || stopped || t == opts.rounds || t % rec.stride == 0) {
      rec.samples.push_back(RoundSample{t, maxl, empty, legit, fault});
      if (c.total_load() != c.ball_count()) {
        throw RunError("ball conservation violated", t);
      }
    }
  }

  rec.rounds_executed = c.round();
  rec.mean_empty_fraction = empty_sum / static_cast<double>(rec.rounds_executed + 1);
  rec.final_ball_count = c.ball_count();
  if (rec.traced) {
    rec.ball_progress.reserve(static_cast<std::size_t>(c.ball_count()));
    for (std::uint64_t b = 0; b < c.ball_count(); ++b) {
      const BallTrace& tr = c.trace(static_cast<std::uint32_t>(b));
      BallSummary summary;
      summary.progress_total = tr.progress_total;
      summary.cover_round = tr.cover_round;
      summary.events_recorded = tr.events_recorded;
      summary.progress_rounds = tr.progress_rounds;
      rec.ball_progress.push_back(std::move(summary));
    }
  }
  return rec;
}

}  // namespace

RunRecord run(Configuration c0, const Graph& g, Strategy strategy, const RunOptions& opts,
              RunRngs& rngs, std::span<RoundObserver* const> observers) {
  return run_impl(std::move(c0), g, strategy, opts, nullptr, rngs, observers);
}

RunRecord faulty_run(Configuration c0, const Graph& g, Strategy strategy,
                     const RunOptions& opts, const FaultSchedule& schedule, RunRngs& rngs,
                     std::span<RoundObserver* const> observers) {
  return run_impl(std::move(c0), g, strategy, opts, &schedule, rngs, observers);
}

}  // namespace rbb
