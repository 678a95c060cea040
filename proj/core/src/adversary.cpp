#include "rbb/adversary.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#include "rbb/errors.hpp"
#include "rbb/expr.hpp"

namespace rbb {

std::string FaultPolicy::describe() const {
  switch (kind) {
    case Kind::all_in_one:
      return "all_in_one:" + std::to_string(target);
    case Kind::uniform_reshuffle:
      return "uniform_reshuffle";
    default:
      return "adversarial_custom";
  }
}

void apply_fault(Configuration& c, const FaultPolicy& p, RngStream& fault_rng) {
  const std::uint32_t n = c.n_;
  const std::uint64_t m = c.m_;
  const bool traced = c.traced();

  std::fill(c.loads_.begin(), c.loads_.end(), 0u);
  if (traced) {
    for (auto& q : c.queues_) q.clear();
  }

  switch (p.kind) {
    case FaultPolicy::Kind::all_in_one: {
      if (p.target >= n) {
        throw FaultSpecError("fault target node " + std::to_string(p.target) +
                             " is out of range");
      }
      c.loads_[p.target] = static_cast<std::uint32_t>(m);
      if (traced) {
        for (std::uint64_t ball = 0; ball < m; ++ball) {
          c.queues_[p.target].push_back(static_cast<std::uint32_t>(ball));
        }
      }
      break;
    }
    case FaultPolicy::Kind::adversarial_custom: {
      if (p.counts.size() != n) {
        throw FaultSpecError("fault count vector needs one entry per node");
      }
      const std::uint64_t sum =
          std::accumulate(p.counts.begin(), p.counts.end(), std::uint64_t{0});
      if (sum != m) {
        throw FaultSpecError("fault count vector sums to " + std::to_string(sum) +
                             ", expected " + std::to_string(m));
      }
      std::uint64_t ball = 0;
      for (std::uint32_t v = 0; v < n; ++v) {
        c.loads_[v] = static_cast<std::uint32_t>(p.counts[v]);
        if (traced) {
          for (std::uint64_t i = 0; i < p.counts[v]; ++i) {
            c.queues_[v].push_back(static_cast<std::uint32_t>(ball++));
          }
        }
      }
      break;
    }
    case FaultPolicy::Kind::uniform_reshuffle: {
      for (std::uint64_t ball = 0; ball < m; ++ball) {
        const auto v = static_cast<std::uint32_t>(fault_rng.index(n));
        ++c.loads_[v];
        if (traced) c.queues_[v].push_back(static_cast<std::uint32_t>(ball));
      }
      break;
    }
  }
}

bool FaultSchedule::fires(std::uint64_t round, RngStream& fault_rng) const {
  switch (trigger) {
    case Trigger::periodic:
      return round % period == 0;
    case Trigger::bernoulli:
      return fault_rng.bernoulli(rate);
    default:
      return std::binary_search(rounds.begin(), rounds.end(), round);
  }
}

void FaultSchedule::validate() const {
  switch (trigger) {
    case Trigger::periodic:
      if (period < 1) throw FaultSpecError("fault period must be at least 1");
      break;
    case Trigger::bernoulli:
      if (!(rate >= 0.0 && rate <= 1.0)) {
        throw FaultSpecError("fault rate must lie in [0, 1]");
      }
      break;
    default:
      if (std::adjacent_find(rounds.begin(), rounds.end(), std::greater_equal<>()) !=
          rounds.end()) {
        throw FaultSpecError("fault rounds must be strictly increasing");
      }
      break;
  }
  if (policy.kind == FaultPolicy::Kind::adversarial_custom && policy.counts.empty()) {
    throw FaultSpecError("adversarial_custom fault policy needs a count vector");
  }
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

FaultPolicy parse_policy(const std::vector<std::string>& parts, std::size_t offset,
                         std::string_view text) {
  if (parts.size() <= offset) {
    throw FaultSpecError("fault spec '" + std::string(text) + "' is missing a policy");
  }
  const std::string& name = parts[offset];
  if (name == "uniform_reshuffle") {
    if (parts.size() > offset + 1) {
      throw FaultSpecError("uniform_reshuffle takes no target in '" + std::string(text) +
                           "'");
    }
    return FaultPolicy::uniform_reshuffle();
  }
  if (name == "all_in_one") {
    if (parts.size() != offset + 2 || parts[offset + 1].empty() ||
        parts[offset + 1].find_first_not_of("0123456789") != std::string::npos) {
      throw FaultSpecError("all_in_one needs a numeric target in '" + std::string(text) +
                           "'");
    }
    return FaultPolicy::all_in_one(static_cast<std::uint32_t>(std::stoul(parts[offset + 1])));
  }
  throw FaultSpecError("unknown fault policy '" + name + "' in '" + std::string(text) + "'");
}

}  // namespace

FaultSchedule FaultSchedule::parse(std::string_view text, std::uint32_t n) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() < 3) {
    throw FaultSpecError("fault spec '" + std::string(text) +
                         "' needs trigger:argument:policy");
  }
  FaultSchedule schedule;
  if (parts[0] == "periodic") {
    schedule.trigger = Trigger::periodic;
    try {
      schedule.period = eval_round_expr(parts[1], n);
    } catch (const ParseError& e) {
      throw FaultSpecError(std::string("bad fault period: ") + e.what());
    }
  } else if (parts[0] == "bernoulli") {
    schedule.trigger = Trigger::bernoulli;
    try {
      schedule.rate = std::stod(parts[1]);
    } catch (const std::exception&) {
      throw FaultSpecError("bad fault rate '" + parts[1] + "'");
    }
  } else if (parts[0] == "at") {
    schedule.trigger = Trigger::at_rounds;
    if (!parts[1].empty()) {
      for (const std::string& item : split(parts[1], ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
          throw FaultSpecError("bad fault round '" + item + "' in '" + std::string(text) +
                               "'");
        }
        schedule.rounds.push_back(std::stoull(item));
      }
    }
  } else {
    throw FaultSpecError("unknown fault trigger '" + parts[0] + "'");
  }
  schedule.policy = parse_policy(parts, 2, text);
  schedule.validate();
  return schedule;
}

std::string FaultSchedule::describe() const {
  switch (trigger) {
    case Trigger::periodic:
      return "periodic:" + std::to_string(period) + ":" + policy.describe();
    case Trigger::bernoulli: {
      char buffer[32];
      std::snprintf(buffer, sizeof(buffer), "%g", rate);
      return std::string("bernoulli:") + buffer + ":" + policy.describe();
    }
    default: {
      std::string joined;
      for (std::size_t i = 0; i < rounds.size(); ++i) {
        if (i > 0) joined += ',';
        joined += std::to_string(rounds[i]);
      }
      return "at:" + joined + ":" + policy.describe();
    }
  }
}

}  // namespace rbb
