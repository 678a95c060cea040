#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "rbb/baselines.hpp"
#include "rbb/errors.hpp"
#include "rbb/graph.hpp"
#include "rbb/metrics.hpp"
#include "rbb/process.hpp"
#include "rbb/rng.hpp"

using namespace rbb;

namespace {

// Exact expected cover time of a uniform walk, by state-space linear solve.
// States are (position, visited mask); masks are processed in decreasing
// popcount order, solving the within-mask linear system by elimination.
double exact_cover_mean(const Graph& g, std::uint32_t start) {
  const std::uint32_t n = g.node_count();
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::vector<double>> expect(full + 1,
                                          std::vector<double>(n, 0.0));
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 0; mask <= full; ++mask) masks.push_back(mask);
  std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    return __builtin_popcount(a) > __builtin_popcount(b);
  });
  for (const std::uint32_t mask : masks) {
    if (mask == full) continue;
    // Unknowns: E[pos, mask] for pos in mask. Row: E = 1 + sum over
    // neighbors w of (1/deg) * (w in mask ? E[w, mask] : E[w, mask|w]).
    std::vector<std::uint32_t> in_mask;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (mask & (1u << v)) in_mask.push_back(v);
    }
    const std::size_t k = in_mask.size();
    if (k == 0) continue;
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
      const std::uint32_t v = in_mask[i];
      a[i][i] = 1.0;
      a[i][k] = 1.0;
      const double p = 1.0 / g.degree(v);
      for (std::uint32_t j = 0; j < g.degree(v); ++j) {
        const std::uint32_t w = g.neighbor(v, j);
        if (mask & (1u << w)) {
          const std::size_t col = static_cast<std::size_t>(
              std::find(in_mask.begin(), in_mask.end(), w) - in_mask.begin());
          a[i][col] -= p;
        } else {
          a[i][k] += p * expect[mask | (1u << w)][w];
        }
      }
    }
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t pivot = col;
      for (std::size_t row = col + 1; row < k; ++row) {
        if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
      }
      std::swap(a[col], a[pivot]);
      for (std::size_t row = 0; row < k; ++row) {
        if (row == col) continue;
        const double f = a[row][col] / a[col][col];
        for (std::size_t c = col; c <= k; ++c) a[row][c] -= f * a[col][c];
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      expect[mask][in_mask[i]] = a[i][k] / a[i][i];
    }
  }
  return expect[1u << start][start];
}

}  // namespace

TEST_CASE("memoryless step assigns every ball") {
  RngStream r(3);
  const std::vector<std::uint32_t> loads = memoryless_step(20, 5, r);
  REQUIRE(loads.size() == 5);
  std::uint64_t total = 0;
  for (const std::uint32_t l : loads) total += l;
  CHECK(total == 20);
  CHECK_THROWS_AS(static_cast<void>(memoryless_step(0, 5, r)), PreconditionError);
}

TEST_CASE("memoryless empty fraction approaches the analytic limit") {
  RunOptions opts;
  opts.rounds = 1000;
  opts.stride = 1;
  opts.experiment_id = "memoryless_unit";
  opts.seed = 11;
  const RunRecord record = run_memoryless(1000, 1000, opts, 11);
  CHECK(record.topology == "none");
  CHECK(record.process == ProcessKind::memoryless);
  CHECK(record.rounds_executed == 1000);
  CHECK(record.final_ball_count == 1000);
  const double analytic = std::pow(1.0 - 1.0 / 1000.0, 1000.0);
  CHECK(analytic == doctest::Approx(0.367695424770964).epsilon(1e-12));
  CHECK(std::abs(record.mean_empty_fraction - analytic) < 0.01);
}

TEST_CASE("memoryless empties vanish once balls outnumber bins enough") {
  RunOptions opts;
  opts.rounds = 1000;
  opts.stride = 1;
  opts.seed = 21;

  const RunRecord eight_x = run_memoryless(256, 2048, opts, 21);
  CHECK(eight_x.mean_empty_fraction < 0.002);
  std::uint64_t all_full = 0;
  for (const RoundSample& s : eight_x.samples) all_full += (s.empty_fraction == 0.0);
  CHECK(all_full >= static_cast<std::uint64_t>(0.85 * eight_x.samples.size()));

  const RunRecord log_scaled = run_memoryless(256, 3 * 256 * 8, opts, 22);
  CHECK(log_scaled.mean_empty_fraction == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("dominating step fills empty nodes before forwarding") {
  const Graph g = make_complete(3);
  RunRngs rngs = RunRngs::from_seed(6);
  Configuration c = init_config(g, 1, Placement::all_in_one(0), Mode::anonymous, rngs.order);
  const std::vector<Move> moves = dominating_step(c, g, Strategy::fifo, rngs);
  CHECK(c.ball_count() == 3);
  CHECK(c.total_load() == 3);
  CHECK(moves.size() == 3);

  RunRngs tr = RunRngs::from_seed(6);
  Configuration traced = init_config(g, 1, Placement::all_in_one(0), Mode::traced, tr.order);
  CHECK_THROWS_AS(static_cast<void>(dominating_step(traced, g, Strategy::fifo, tr)),
                  PreconditionError);
}

TEST_CASE("dominating run with no empty nodes stays at the initial ball count") {
  const Graph g = make_complete(2);
  RunOptions opts;
  opts.rounds = 10;
  opts.seed = 13;
  RunRngs rngs = RunRngs::from_seed(13);
  Configuration c = init_config(g, 2, Placement::one_per_node(), Mode::anonymous, rngs.order);
  const RunRecord record = run_dominating(std::move(c), g, Strategy::fifo, opts, rngs);
  CHECK(record.process == ProcessKind::dominating);
  CHECK(record.final_ball_count == 2);
  for (const RoundSample& s : record.samples) CHECK(s.max_load == 1);
}

TEST_CASE("dominating run grows the ball count from a skewed start") {
  const Graph g = make_complete(4);
  RunOptions opts;
  opts.rounds = 50;
  opts.seed = 14;
  RunRngs rngs = RunRngs::from_seed(14);
  Configuration c = init_config(g, 4, Placement::all_in_one(0), Mode::anonymous, rngs.order);
  const RunRecord record = run_dominating(std::move(c), g, Strategy::fifo, opts, rngs);
  CHECK(record.final_ball_count > 4);
}

TEST_CASE("coupon collector closed form") {
  CHECK(coupon_collector_mean(2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(coupon_collector_mean(4) == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(coupon_collector_mean(64) == doctest::Approx(297.880751933463).epsilon(1e-9));
  CHECK_THROWS_AS(static_cast<void>(coupon_collector_mean(1)), PreconditionError);
}

TEST_CASE("single ball cover on two nodes takes one round") {
  const Graph g = make_complete(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream r(seed);
    const auto cover = single_ball_cover_time(g, 0, r);
    REQUIRE(cover.has_value());
    CHECK(*cover == 1);
  }
}

TEST_CASE("single ball cover respects the round cap") {
  const Graph g = make_ring(8);
  RngStream r(5);
  CHECK_FALSE(single_ball_cover_time(g, 0, r, 3).has_value());
}

TEST_CASE("single ball cover needs a connected graph") {
  std::istringstream in("0 1\n2 3\n");
  const Graph g = load_edge_list(in);
  RngStream r(5);
  CHECK_THROWS_AS(static_cast<void>(single_ball_cover_time(g, 0, r)), PreconditionError);
}

TEST_CASE("four-cycle cover time matches the exact chain solve") {
  const Graph g = make_ring(4);
  const double exact = exact_cover_mean(g, 0);
  CHECK(exact == doctest::Approx(6.0).epsilon(1e-9));

  double sum = 0.0;
  const int runs = 20000;
  for (int rep = 0; rep < runs; ++rep) {
    RngStream r(derive_seed(404, "cycle_cover", 4, 1, static_cast<std::uint32_t>(rep)));
    const auto cover = single_ball_cover_time(g, 0, r);
    REQUIRE(cover.has_value());
    sum += static_cast<double>(*cover);
  }
  const double mean = sum / runs;
  CHECK(std::abs(mean - exact) < 0.1);
}

TEST_CASE("complete-graph cover matches the coupon mean") {
  const Graph g = make_complete(8);
  const double exact = exact_cover_mean(g, 0);
  CHECK(exact == doctest::Approx(coupon_collector_mean(8)).epsilon(1e-9));
}

TEST_CASE("single ball run record mirrors the walk") {
  const Graph g = make_complete(16);
  RunOptions opts;
  opts.rounds = 100000;
  opts.experiment_id = "walk";
  opts.seed = 31;
  const RunRecord record = run_single_ball(g, 3, 100000, 31, opts);
  CHECK(record.process == ProcessKind::single_ball);
  CHECK(record.m == 1);
  CHECK(record.traced);
  CHECK(record.initial_legitimate);
  REQUIRE(record.cover_time.has_value());
  CHECK(record.rounds_executed == *record.cover_time);
  CHECK(record.max_load_overall == 1);
  REQUIRE(record.ball_progress.size() == 1);
  CHECK(record.ball_progress[0].progress_total == record.rounds_executed);
  CHECK(record.ball_progress[0].cover_round == record.cover_time);
  for (const RoundSample& s : record.samples) {
    CHECK(s.max_load == 1);
    CHECK(s.empty_fraction == doctest::Approx(15.0 / 16.0));
  }
}

TEST_CASE("single ball empirical mean tracks the analytic value") {
  const Graph g = make_complete(16);
  double sum = 0.0;
  const int runs = 4000;
  for (int rep = 0; rep < runs; ++rep) {
    RngStream r(derive_seed(505, "k16_cover", 16, 1, static_cast<std::uint32_t>(rep)));
    sum += static_cast<double>(*single_ball_cover_time(g, 0, r));
  }
  const double mean = sum / runs;
  const double analytic = coupon_collector_mean(16);
  CHECK(std::abs(mean / analytic - 1.0) < 0.05);
}
