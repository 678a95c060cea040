#include "rbb/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rbb/errors.hpp"

namespace rbb {

namespace {

std::uint32_t parse_node_token(const std::string& token, std::uint64_t line_no) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos ||
      token.size() > 10) {
    throw ParseError("expected a non-negative node index, got '" + token + "'", line_no);
  }
  const unsigned long long value = std::stoull(token);
  if (value > 0xfffffffeULL) {
    throw ParseError("node index out of range: " + token, line_no);
  }
  return static_cast<std::uint32_t>(value);
}

}  // namespace

void Graph::adopt_edges(std::uint32_t n,
                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_list) {
  n_ = n;
  edge_count_ = edge_list.size();
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : edge_list) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (std::uint32_t v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
  adjacency_.resize(2 * edge_list.size());
  std::vector<std::uint64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : edge_list) {
    adjacency_[cursor[u]++] = v;
    adjacency_[cursor[v]++] = u;
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
    if (offsets_[v] == offsets_[v + 1]) {
      throw TopologyError("node " + std::to_string(v) + " has degree 0");
    }
  }

  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> frontier{0};
  seen[0] = 1;
  std::uint32_t reached = 1;
  while (!frontier.empty()) {
    const std::uint32_t v = frontier.back();
    frontier.pop_back();
    for (std::uint64_t i = offsets_[v]; i < offsets_[v + 1]; ++i) {
      const std::uint32_t w = adjacency_[i];
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push_back(w);
      }
    }
  }
  connected_ = (reached == n);
}

std::uint32_t Graph::degree(std::uint32_t v) const {
  switch (kind_) {
    case TopologyKind::complete:
      return n_ - 1;
    case TopologyKind::ring:
      return 2;
    default:
      return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }
}

std::uint32_t Graph::neighbor(std::uint32_t v, std::uint32_t i) const {
  switch (kind_) {
    case TopologyKind::complete:
      return i < v ? i : i + 1;
    case TopologyKind::ring:
      return i == 0 ? (v + n_ - 1) % n_ : (v + 1) % n_;
    default:
      return adjacency_[offsets_[v] + i];
  }
}

bool Graph::adjacent(std::uint32_t u, std::uint32_t v) const {
  if (u == v) return false;
  switch (kind_) {
    case TopologyKind::complete:
      return true;
    case TopologyKind::ring: {
      const std::uint32_t d = u < v ? v - u : u - v;
      return d == 1 || d == n_ - 1;
    }
    default: {
      const auto begin = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]);
      const auto end = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]);
      return std::binary_search(begin, end, v);
    }
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Graph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_count_);
  switch (kind_) {
    case TopologyKind::complete:
      for (std::uint32_t u = 0; u < n_; ++u)
        for (std::uint32_t v = u + 1; v < n_; ++v) out.emplace_back(u, v);
      break;
    case TopologyKind::ring:
      for (std::uint32_t u = 0; u + 1 < n_; ++u) out.emplace_back(u, u + 1);
      out.emplace_back(0, n_ - 1);
      std::sort(out.begin(), out.end());
      break;
    default:
      for (std::uint32_t u = 0; u < n_; ++u)
        for (std::uint64_t i = offsets_[u]; i < offsets_[u + 1]; ++i)
          if (adjacency_[i] > u) out.emplace_back(u, adjacency_[i]);
      break;
  }
  return out;
}

std::string Graph::describe() const {
  switch (kind_) {
    case TopologyKind::complete:
      return "complete";
    case TopologyKind::ring:
      return "ring";
    case TopologyKind::random_regular:
      return "regular:" + std::to_string(regular_degree_);
    default:
      return "custom";
  }
}

std::uint32_t Graph::sample_neighbor(std::uint32_t v, RngStream& rng) const {
  switch (kind_) {
    case TopologyKind::complete: {
      std::uint32_t j = static_cast<std::uint32_t>(rng.index(n_ - 1));
      if (j >= v) ++j;
      return j;
    }
    case TopologyKind::ring:
      return rng.index(2) == 0 ? (v + n_ - 1) % n_ : (v + 1) % n_;
    default:
      return adjacency_[offsets_[v] + rng.index(offsets_[v + 1] - offsets_[v])];
  }
}

Graph make_complete(std::uint32_t n) {
  if (n < 2) throw TopologyError("complete graph needs n >= 2, got " + std::to_string(n));
  Graph g;
  g.kind_ = TopologyKind::complete;
  g.n_ = n;
  g.edge_count_ = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  g.connected_ = true;
  return g;
}

Graph make_ring(std::uint32_t n) {
  if (n < 3) throw TopologyError("ring needs n >= 3, got " + std::to_string(n));
  Graph g;
  g.kind_ = TopologyKind::ring;
  g.n_ = n;
  g.edge_count_ = n;
  g.connected_ = true;
  return g;
}

Graph make_random_regular(std::uint32_t n, std::uint32_t d, std::uint64_t seed) {
  if (n < 2) throw TopologyError("regular graph needs n >= 2, got " + std::to_string(n));
  if (d < 1) throw TopologyError("regular graph needs degree >= 1");
  if (d >= n) throw TopologyError("degree " + std::to_string(d) + " requires more than " +
                                  std::to_string(n) + " nodes");
  if ((static_cast<std::uint64_t>(n) * d) % 2 != 0) {
    throw TopologyError("n*d must be even, got n=" + std::to_string(n) +
                        " d=" + std::to_string(d));
  }

  RngStream rng(seed);
  const std::uint64_t stub_count = static_cast<std::uint64_t>(n) * d;
  const std::uint64_t edge_total = stub_count / 2;
  std::vector<std::uint32_t> stubs(stub_count);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(edge_total);

  const auto pack = [](std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };

  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (std::uint64_t i = 0; i < stub_count; ++i) {
      stubs[i] = static_cast<std::uint32_t>(i / d);
    }
    for (std::uint64_t i = stub_count - 1; i > 0; --i) {
      const std::uint64_t j = rng.index(i + 1);
      std::swap(stubs[i], stubs[j]);
    }

    // Count occurrences of each non-loop edge; a slot is defective when it
    // holds a self-loop or a copy of an edge already placed elsewhere.
    std::unordered_map<std::uint64_t, std::uint32_t> uses;
    uses.reserve(edge_total * 2);
    std::vector<std::uint64_t> defects;
    for (std::uint64_t i = 0; i < edge_total; ++i) {
      const std::uint32_t a = stubs[2 * i];
      const std::uint32_t b = stubs[2 * i + 1];
      edges[i] = {a, b};
      if (a == b) {
        defects.push_back(i);
      } else if (++uses[pack(a, b)] > 1) {
        defects.push_back(i);
      }
    }

    // Repair defects in place with degree-preserving double edge swaps:
    // replace (a,b) and (c,e) with (a,c) and (b,e) when both replacements
    // are new simple edges. Each accepted swap removes at least one defect
    // and never creates one, so the loop terminates quickly whenever a
    // simple d-regular graph exists.
    std::uint64_t budget = 200 * edge_total + 10000;
    while (!defects.empty() && budget > 0) {
      --budget;
      const std::uint64_t i = defects.back();
      const std::uint32_t a = edges[i].first;
      const std::uint32_t b = edges[i].second;
      if (a != b && uses[pack(a, b)] <= 1) {
        defects.pop_back();
        continue;
      }
      const std::uint64_t j = rng.index(edge_total);
      if (j == i) continue;
      std::uint32_t c = edges[j].first;
      std::uint32_t e = edges[j].second;
      if (rng.bernoulli(0.5)) std::swap(c, e);
      if (a == c || b == e) continue;
      const std::uint64_t new1 = pack(a, c);
      const std::uint64_t new2 = pack(b, e);
      if (new1 == new2) continue;
      if (a != b) --uses[pack(a, b)];
      if (c != e) --uses[pack(c, e)];
      if (uses[new1] == 0 && uses[new2] == 0) {
        ++uses[new1];
        ++uses[new2];
        edges[i] = {a, c};
        edges[j] = {b, e};
        defects.pop_back();
      } else {
        if (a != b) ++uses[pack(a, b)];
        if (c != e) ++uses[pack(c, e)];
      }
    }

    if (defects.empty()) {
      for (auto& [u, v] : edges) {
        if (u > v) std::swap(u, v);
      }
      std::sort(edges.begin(), edges.end());
      Graph g;
      g.kind_ = TopologyKind::random_regular;
      g.regular_degree_ = d;
      g.adopt_edges(n, edges);
      return g;
    }
  }
  throw GenerationError("no simple " + std::to_string(d) + "-regular graph on " +
                        std::to_string(n) + " nodes after " + std::to_string(kMaxAttempts) +
                        " pairing attempts");
}

Graph load_edge_list(std::istream& in) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::uint32_t max_node = 0;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (a[0] == '#') continue;
    if (!(fields >> b)) throw ParseError("expected two node indices", line_no);
    if (fields >> extra) throw ParseError("trailing content '" + extra + "'", line_no);
    std::uint32_t u = parse_node_token(a, line_no);
    std::uint32_t v = parse_node_token(b, line_no);
    if (u == v) throw ParseError("self-loop at node " + std::to_string(u), line_no);
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) {
      throw ParseError("duplicate edge " + std::to_string(u) + " " + std::to_string(v),
                       line_no);
    }
    edge_list.emplace_back(u, v);
    max_node = std::max(max_node, v);
  }
  if (edge_list.empty()) throw ParseError("edge list is empty");
  Graph g;
  g.kind_ = TopologyKind::custom;
  g.adopt_edges(max_node + 1, edge_list);
  return g;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list file: " + path);
  try {
    return load_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace rbb
