#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rbb/rng.hpp"

namespace rbb {

enum class TopologyKind { complete, ring, random_regular, custom };

// Undirected simple graph on nodes 0..n-1. Complete graphs and rings use
// implicit neighbor formulas (no stored adjacency); other kinds use a
// compressed adjacency layout with sorted neighbor lists. Immutable after
// construction and safe to share across threads.
class Graph {
 public:
  std::uint32_t node_count() const noexcept { return n_; }
  TopologyKind kind() const noexcept { return kind_; }
  bool is_connected() const noexcept { return connected_; }
  std::uint64_t edge_count() const noexcept { return edge_count_; }

  std::uint32_t degree(std::uint32_t v) const;
  std::uint32_t neighbor(std::uint32_t v, std::uint32_t i) const;
  bool adjacent(std::uint32_t u, std::uint32_t v) const;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

  // "complete", "ring", "regular:<d>" or "custom".
  std::string describe() const;

  // Uniform draw over the neighbors of v, consuming exactly one value from
  // the stream regardless of topology or degree.
  std::uint32_t sample_neighbor(std::uint32_t v, RngStream& rng) const;

  friend Graph make_complete(std::uint32_t n);
  friend Graph make_ring(std::uint32_t n);
  friend Graph make_random_regular(std::uint32_t n, std::uint32_t d, std::uint64_t seed);
  friend Graph load_edge_list(std::istream& in);

 private:
  Graph() = default;

  void adopt_edges(std::uint32_t n,
                   const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_list);

  TopologyKind kind_ = TopologyKind::custom;
  std::uint32_t n_ = 0;
  std::uint32_t regular_degree_ = 0;
  std::uint64_t edge_count_ = 0;
  bool connected_ = false;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> adjacency_;
};

Graph make_complete(std::uint32_t n);
Graph make_ring(std::uint32_t n);

// Pairing-model sampler with full restart whenever the pairing produces a
// self-loop or parallel edge; throws GenerationError after 1000 restarts.
Graph make_random_regular(std::uint32_t n, std::uint32_t d, std::uint64_t seed);

// Plain-text edge list, one "u v" pair per line, 0-indexed. Blank lines and
// lines starting with '#' are skipped. Self-loops, duplicate edges and
// malformed tokens raise ParseError with the line number; isolated nodes
// raise TopologyError.
Graph load_edge_list(std::istream& in);
Graph load_edge_list(const std::string& path);

}  // namespace rbb
