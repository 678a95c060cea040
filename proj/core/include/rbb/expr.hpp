#pragma once

#include <cstdint>
#include <string_view>

namespace rbb {

// Smallest k with 2^k >= n (so 256 -> 8, 1000 -> 10); 0 for n <= 1.
std::uint32_t ceil_log2(std::uint64_t n);

// Evaluates a round-budget expression in n. Supported forms: a non-negative
// integer constant, c*n, c*n^2 (also written c*n*n), and c*n*log2(n) (log2n
// accepted); the coefficient and '*' are optional and whitespace and case are
// ignored. log2 is rounded up to an integer. Anything else raises ParseError.
std::uint64_t eval_round_expr(std::string_view text, std::uint32_t n);

}  // namespace rbb
