#include "rbb/configuration.hpp"

#include <numeric>
#include <string>

#include "rbb/errors.hpp"

namespace rbb {

const std::deque<std::uint32_t>& Configuration::queue(std::uint32_t v) const {
  if (!traced()) throw TracingRequiredError("ball queues exist only in traced mode");
  return queues_[v];
}

const BallTrace& Configuration::trace(std::uint32_t ball) const {
  if (!traced()) throw TracingRequiredError("ball traces exist only in traced mode");
  return traces_[ball];
}

std::uint64_t Configuration::covered_count() const {
  if (!traced()) throw TracingRequiredError("cover data exists only in traced mode");
  return covered_count_;
}

std::uint64_t Configuration::total_load() const {
  return std::accumulate(loads_.begin(), loads_.end(), std::uint64_t{0});
}

void Configuration::add_ball(std::uint32_t v) {
  if (traced()) {
    throw PreconditionError("fresh-ball insertion is defined on anonymous configurations");
  }
  ++loads_[v];
  ++m_;
}

Configuration init_config(const Graph& g, std::uint64_t m, const Placement& p, Mode mode,
                          RngStream& order_rng, const TraceOptions& topts) {
  if (m < 1) throw PlacementError("need at least one ball");
  const std::uint32_t n = g.node_count();

  Configuration c;
  c.mode_ = mode;
  c.n_ = n;
  c.m_ = m;
  c.loads_.assign(n, 0);

  std::vector<std::uint32_t> start_node;
  if (mode == Mode::traced) {
    if (m > 0xffffffffULL) throw PlacementError("traced mode supports at most 2^32 balls");
    start_node.resize(m);
  }
  auto place = [&](std::uint64_t ball, std::uint32_t v) {
    ++c.loads_[v];
    if (mode == Mode::traced) start_node[ball] = v;
  };

  switch (p.kind) {
    case Placement::Kind::one_per_node: {
      std::uint64_t ball = 0;
      for (std::uint32_t v = 0; v < n; ++v) {
        const std::uint64_t count = m / n + (v < m % n ? 1 : 0);
        for (std::uint64_t i = 0; i < count; ++i) place(ball++, v);
      }
      break;
    }
    case Placement::Kind::all_in_one: {
      if (p.target >= n) {
        throw PlacementError("placement target node " + std::to_string(p.target) +
                             " is out of range");
      }
      for (std::uint64_t ball = 0; ball < m; ++ball) place(ball, p.target);
      break;
    }
    case Placement::Kind::uniform_random: {
      for (std::uint64_t ball = 0; ball < m; ++ball) {
        place(ball, static_cast<std::uint32_t>(order_rng.index(n)));
      }
      break;
    }
    case Placement::Kind::custom: {
      if (p.counts.size() != n) {
        throw PlacementError("custom placement needs one count per node");
      }
      const std::uint64_t sum =
          std::accumulate(p.counts.begin(), p.counts.end(), std::uint64_t{0});
      if (sum != m) {
        throw PlacementError("custom placement counts sum to " + std::to_string(sum) +
                             ", expected " + std::to_string(m));
      }
      std::uint64_t ball = 0;
      for (std::uint32_t v = 0; v < n; ++v) {
        for (std::uint64_t i = 0; i < p.counts[v]; ++i) place(ball++, v);
      }
      break;
    }
  }

  if (mode == Mode::traced) {
    c.queues_.resize(n);
    c.traces_.resize(m);
    for (std::uint64_t ball = 0; ball < m; ++ball) {
      const std::uint32_t v = start_node[ball];
      c.queues_[v].push_back(static_cast<std::uint32_t>(ball));
      BallTrace& tr = c.traces_[ball];
      tr.visited.assign(n, false);
      tr.visited[v] = true;
      tr.visited_count = 1;
      tr.events_recorded = topts.record_progress_rounds;
    }
  }
  return c;
}

}  // namespace rbb
