#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rbb {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One independently seeded generator. mt19937_64 has a fully specified
// algorithm, so sequences are identical across platforms and compilers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform value in [0, bound) consuming exactly one engine output.
  // The multiply-high map has bias below bound/2^64.
  std::uint64_t index(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  // Uniform double in [0, 1) from the top 53 bits of one output.
  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // True with probability p, consuming exactly one output.
  bool bernoulli(double p) { return real01() < p; }

 private:
  std::mt19937_64 engine_;
};

// The three streams a run consumes. Keeping destination draws separate from
// ordering and fault randomness is what makes anonymous and traced runs of
// the same seed produce identical load vectors: anonymous mode simply never
// touches the draws that only affect ball identity.
struct RunRngs {
  RngStream dest;
  RngStream order;
  RngStream fault;

  static RunRngs from_seed(std::uint64_t seed) {
    const std::uint64_t base = splitmix64(seed);
    return RunRngs{RngStream(splitmix64(base ^ 1)), RngStream(splitmix64(base ^ 2)),
                   RngStream(splitmix64(base ^ 3))};
  }

  // Seed reserved for random topology construction under the same run seed.
  static std::uint64_t graph_seed(std::uint64_t seed) {
    return splitmix64(splitmix64(seed) ^ 4);
  }
};

// Deterministic per-run seed: master seed, experiment id, sweep cell and
// repetition index are hashed together so every run draws from its own
// stream family.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment_id,
                                 std::uint64_t n, std::uint64_t m, std::uint64_t rep) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(experiment_id));
  h = splitmix64(h ^ n);
  h = splitmix64(h ^ m);
  h = splitmix64(h ^ rep);
  return h;
}

}  // namespace rbb
