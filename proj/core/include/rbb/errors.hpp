#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rbb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid topology parameters (n too small, bad degree, malformed edge list).
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Random graph construction gave up after the retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Initial ball placement does not match the graph or ball count.
class PlacementError : public Error {
 public:
  using Error::Error;
};

// Fault policy and configuration disagree (e.g. count vector sum != m).
class FaultSpecError : public Error {
 public:
  using Error::Error;
};

// A per-ball quantity was requested from an anonymous-mode run.
class TracingRequiredError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Malformed textual input; carries a 1-based line number when one applies.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(const std::string& what, std::uint64_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::uint64_t line() const noexcept { return line_; }

 private:
  std::uint64_t line_ = 0;
};

// Failure while a run is in flight; carries the offending round.
class RunError : public Error {
 public:
  explicit RunError(const std::string& what) : Error(what) {}
  RunError(const std::string& what, std::uint64_t round)
      : Error(what + " (round " + std::to_string(round) + ")"), round_(round) {}
  std::uint64_t round() const noexcept { return round_; }

 private:
  std::uint64_t round_ = 0;
};

}  // namespace rbb
