#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rbb/configuration.hpp"
#include "rbb/graph.hpp"
#include "rbb/metrics.hpp"
#include "rbb/rng.hpp"

namespace rbb {

inline constexpr std::uint32_t kNoBall = 0xffffffffu;

struct Move {
  std::uint32_t source = 0;
  std::uint32_t dest = 0;
  std::uint32_t ball = kNoBall;
};

// Incrementally maintained load histogram: O(1) per ball movement, so max
// load and the empty-node count are available every round even on budgets of
// n^2 rounds.
class LoadStats {
 public:
  LoadStats() = default;
  explicit LoadStats(const Configuration& c) { refresh(c); }

  void refresh(const Configuration& c);

  void on_departure(std::uint32_t load_before) {
    --counts_[load_before];
    ++counts_[load_before - 1];
  }

  void on_arrival(std::uint32_t load_after) {
    if (load_after >= counts_.size()) counts_.resize(load_after + 1, 0);
    --counts_[load_after - 1];
    ++counts_[load_after];
    if (load_after > max_) max_ = load_after;
  }

  std::uint64_t max_load() const {
    while (max_ > 0 && counts_[max_] == 0) --max_;
    return max_;
  }

  std::uint64_t empty_count() const { return counts_[0]; }

 private:
  std::vector<std::uint64_t> counts_;
  mutable std::uint64_t max_ = 0;
};

// Observer called once per executed round with the round's move record.
// Returning true from stop_requested ends the run after the current round.
class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  virtual void on_init(const Configuration&) {}
  virtual void on_round(const Configuration&, std::span<const Move>, bool /*fault*/) {}
  virtual bool stop_requested() const { return false; }
};

// Stops the run once every ball has visited every node.
class CoverStopObserver : public RoundObserver {
 public:
  void on_round(const Configuration& c, std::span<const Move>, bool) override {
    done_ = c.traced() && c.covered_count() == c.ball_count();
  }
  bool stop_requested() const override { return done_; }

 private:
  bool done_ = false;
};

// One synchronous round: every non-empty node selects one ball (per the
// strategy), all selected balls are assigned destinations via uniform
// neighbor draws in ascending source order, then arrivals are appended to
// destination queues; a ball arriving in round t is not forwardable before
// round t+1. Reusable across rounds to avoid per-round allocation.
class Stepper {
 public:
  Stepper(const Graph& g, Strategy strategy, ArrivalOrder arrival = ArrivalOrder::shuffled);

  const std::vector<Move>& step(Configuration& c, RunRngs& rngs, LoadStats* stats = nullptr);

 private:
  void step_anonymous(Configuration& c, RunRngs& rngs, LoadStats* stats);
  void step_traced(Configuration& c, RunRngs& rngs, LoadStats* stats);

  const Graph* g_;
  Strategy strategy_;
  ArrivalOrder arrival_;
  std::vector<Move> moves_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

// Single-round convenience wrapper; returns the move record.
std::vector<Move> step(Configuration& c, const Graph& g, Strategy strategy, RunRngs& rngs);

struct RunOptions {
  std::uint64_t rounds = 0;
  // 0 selects the default: 1 while rounds <= 10^4, else ceil(rounds/10^4).
  // Max load and legitimacy are still evaluated every round.
  std::uint64_t stride = 0;
  LegitimacyRule rule{};
  ArrivalOrder arrival_order = ArrivalOrder::shuffled;
  // Rounds whose max load is recorded in RunRecord::checkpoint_loads.
  std::vector<std::uint64_t> checkpoints;
  std::string experiment_id;
  // base runs conserve balls; dominating inserts one fresh ball into every
  // empty node at the start of each round.
  ProcessKind process = ProcessKind::base;
  std::uint64_t seed = 0;
};

// Applies step exactly opts.rounds times (or until an observer requests an
// early stop), streaming metrics every round and snapshotting at the stride.
// Ball conservation is re-counted at every sampled round; a mismatch or an
// observer exception aborts with RunError carrying the round number.
RunRecord run(Configuration c0, const Graph& g, Strategy strategy, const RunOptions& opts,
              RunRngs& rngs, std::span<RoundObserver* const> observers = {});

}  // namespace rbb
