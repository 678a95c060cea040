#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "rbb/graph.hpp"
#include "rbb/rng.hpp"

namespace rbb {

enum class Mode { anonymous, traced };

// How a non-empty node picks the ball it forwards.
enum class Strategy { fifo, lifo, uniform_random };

// Order in which same-round arrivals are appended to a destination queue.
enum class ArrivalOrder { shuffled, source_order };

struct Placement {
  enum class Kind { one_per_node, all_in_one, uniform_random, custom };

  Kind kind = Kind::one_per_node;
  std::uint32_t target = 0;
  std::vector<std::uint64_t> counts;

  static Placement one_per_node() { return {}; }
  static Placement all_in_one(std::uint32_t node) {
    Placement p;
    p.kind = Kind::all_in_one;
    p.target = node;
    return p;
  }
  static Placement uniform_random() {
    Placement p;
    p.kind = Kind::uniform_random;
    return p;
  }
  static Placement custom(std::vector<std::uint64_t> counts) {
    Placement p;
    p.kind = Kind::custom;
    p.counts = std::move(counts);
    return p;
  }
};

struct TraceOptions {
  // Keep the list of rounds at which each ball moved, enabling windowed
  // progress queries at O(total moves) memory.
  bool record_progress_rounds = false;
};

// Per-ball history kept in traced mode. The start node counts as visited.
struct BallTrace {
  std::vector<bool> visited;
  std::uint32_t visited_count = 0;
  std::uint64_t progress_total = 0;
  std::optional<std::uint64_t> cover_round;
  bool events_recorded = false;
  std::vector<std::uint64_t> progress_rounds;
};

// Process state: per-node queue sizes, plus per-node ball-id queues and
// per-ball traces in traced mode. Anonymous and traced runs driven by the
// same seed produce identical load vectors at every round.
class Configuration {
 public:
  std::uint32_t node_count() const noexcept { return n_; }
  std::uint64_t ball_count() const noexcept { return m_; }
  std::uint64_t round() const noexcept { return round_; }
  Mode mode() const noexcept { return mode_; }
  bool traced() const noexcept { return mode_ == Mode::traced; }

  std::uint32_t load(std::uint32_t v) const { return loads_[v]; }
  const std::vector<std::uint32_t>& loads() const noexcept { return loads_; }

  const std::deque<std::uint32_t>& queue(std::uint32_t v) const;
  const BallTrace& trace(std::uint32_t ball) const;

  // Number of balls whose visited set already spans all nodes.
  std::uint64_t covered_count() const;

  // O(n) recount of the total load, used for conservation checks.
  std::uint64_t total_load() const;

  // Appends a brand-new ball (id = current ball count) at node v; anonymous
  // mode only.
  void add_ball(std::uint32_t v);

 private:
  friend class Stepper;
  friend Configuration init_config(const Graph& g, std::uint64_t m, const Placement& p,
                                   Mode mode, RngStream& order_rng, const TraceOptions& topts);
  friend void apply_fault(Configuration& c, const struct FaultPolicy& p, RngStream& fault_rng);

  Mode mode_ = Mode::anonymous;
  std::uint32_t n_ = 0;
  std::uint64_t m_ = 0;
  std::uint64_t round_ = 0;
  std::uint64_t covered_count_ = 0;
  std::vector<std::uint32_t> loads_;
  std::vector<std::deque<std::uint32_t>> queues_;
  std::vector<BallTrace> traces_;
};

// Places m balls on g's nodes at round 0. Ball identifiers 0..m-1 fill
// ascending node indices for the deterministic placements; uniform_random
// draws one placement per ball in ascending ball-id order from order_rng
// (the same draws in both modes, preserving mode equivalence).
Configuration init_config(const Graph& g, std::uint64_t m, const Placement& p, Mode mode,
                          RngStream& order_rng, const TraceOptions& topts = {});

}  // namespace rbb
