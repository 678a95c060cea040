#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rbb/configuration.hpp"
#include "rbb/graph.hpp"
#include "rbb/metrics.hpp"
#include "rbb/process.hpp"
#include "rbb/rng.hpp"

namespace rbb {

// One memoryless round: every ball independently lands in a uniform bin,
// with no memory of previous positions. Returns the resulting load vector.
std::vector<std::uint32_t> memoryless_step(std::uint64_t m, std::uint32_t n, RngStream& r);

// Repeated memoryless re-assignment. Round 0 is the first assignment; each
// later round draws a fresh one. Graph-free; the record's topology reads
// "none".
RunRecord run_memoryless(std::uint32_t n, std::uint64_t m, const RunOptions& opts,
                         std::uint64_t seed);

// One round of the dominating variant: inserts a fresh ball into every empty
// node, then performs the standard step. Anonymous configurations only.
std::vector<Move> dominating_step(Configuration& c, const Graph& g, Strategy strategy,
                                  RunRngs& rngs);

RunRecord run_dominating(Configuration c0, const Graph& g, Strategy strategy,
                         const RunOptions& opts, RunRngs& rngs,
                         std::span<RoundObserver* const> observers = {});

// Rounds a single random walker needs to visit every node, starting from
// `start`; empty when max_rounds elapse first. Requires a connected graph.
std::optional<std::uint64_t> single_ball_cover_time(const Graph& g, std::uint32_t start,
                                                    RngStream& r,
                                                    std::uint64_t max_rounds = ~std::uint64_t{0});

// Exact mean cover time of the single-ball walk on the complete graph:
// (n-1) * H_{n-1}.
double coupon_collector_mean(std::uint32_t n);

// Full-record driver for the single-ball walk (m = 1, moves every round).
RunRecord run_single_ball(const Graph& g, std::uint32_t start, std::uint64_t budget,
                          std::uint64_t seed, const RunOptions& opts);

}  // namespace rbb
