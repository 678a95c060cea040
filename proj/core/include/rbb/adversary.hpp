#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbb/configuration.hpp"
#include "rbb/process.hpp"
#include "rbb/rng.hpp"

namespace rbb {

// How a faulty round re-assigns the balls. Every policy preserves the total
// ball count.
struct FaultPolicy {
  enum class Kind { all_in_one, uniform_reshuffle, adversarial_custom };

  Kind kind = Kind::uniform_reshuffle;
  std::uint32_t target = 0;
  std::vector<std::uint64_t> counts;

  static FaultPolicy all_in_one(std::uint32_t node) {
    FaultPolicy p;
    p.kind = Kind::all_in_one;
    p.target = node;
    return p;
  }
  static FaultPolicy uniform_reshuffle() { return {}; }
  static FaultPolicy adversarial_custom(std::vector<std::uint64_t> counts) {
    FaultPolicy p;
    p.kind = Kind::adversarial_custom;
    p.counts = std::move(counts);
    return p;
  }

  std::string describe() const;
};

// Re-assigns all balls per the policy, in place. Ball visited sets and
// progress counters survive (the adversary moves balls, it does not erase
// their history); a teleport destination does not count as visited until the
// ball arrives there by a forwarding move. In traced mode ascending ball ids
// fill ascending node indices (all_in_one / adversarial_custom), while
// uniform_reshuffle places each ball independently, consuming the same
// fault-stream draws in both modes.
void apply_fault(Configuration& c, const FaultPolicy& p, RngStream& fault_rng);

struct FaultSchedule {
  enum class Trigger { periodic, bernoulli, at_rounds };

  Trigger trigger = Trigger::periodic;
  std::uint64_t period = 1;
  double rate = 0.0;
  std::vector<std::uint64_t> rounds;
  FaultPolicy policy;

  // Whether round fires. The bernoulli trigger consumes exactly one
  // fault-stream draw per call; the others consume none.
  bool fires(std::uint64_t round, RngStream& fault_rng) const;

  // Throws FaultSpecError on period 0, rate outside [0,1] or a round list
  // that is not strictly increasing.
  void validate() const;

  // "periodic:<expr>:<policy>[:<target>]", "bernoulli:<rate>:<policy>[:<target>]"
  // or "at:<r1,r2,...>:<policy>[:<target>]" with policy all_in_one or
  // uniform_reshuffle; <expr> accepts round expressions in n (e.g. "8n").
  static FaultSchedule parse(std::string_view text, std::uint32_t n);

  std::string describe() const;
};

// run() plus apply_fault at the start of each triggered round, before ball
// selection; the record marks faulty rounds and their recovery times.
RunRecord faulty_run(Configuration c0, const Graph& g, Strategy strategy,
                     const RunOptions& opts, const FaultSchedule& schedule, RunRngs& rngs,
                     std::span<RoundObserver* const> observers = {});

}  // namespace rbb
