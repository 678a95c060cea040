#include "rbb/expr.hpp"

#include <bit>
#include <cctype>
#include <regex>
#include <string>

#include "rbb/errors.hpp"

namespace rbb {

std::uint32_t ceil_log2(std::uint64_t n) {
  if (n <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

namespace {

std::uint64_t checked_product(std::uint64_t a, std::uint64_t b, std::string_view text) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(a) * b;
  if (wide > ~std::uint64_t{0}) {
    throw ParseError("round expression overflows 64 bits: '" + std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(wide);
}

std::uint64_t parse_coefficient(const std::string& digits, std::string_view text) {
  if (digits.empty()) return 1;
  if (digits.size() > 19) {
    throw ParseError("coefficient out of range in round expression: '" + std::string(text) +
                     "'");
  }
  return std::stoull(digits);
}

}  // namespace

std::uint64_t eval_round_expr(std::string_view text, std::uint32_t n) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }

  static const std::regex constant_re("([0-9]+)");
  static const std::regex linear_re("([0-9]*)n");
  static const std::regex quadratic_re("([0-9]*)n(?:\\^2|n)");
  static const std::regex n_log_n_re("([0-9]*)nlog2\\(?n\\)?");

  std::smatch match;
  if (std::regex_match(s, match, constant_re)) {
    return parse_coefficient(match[1].str(), text);
  }
  if (std::regex_match(s, match, linear_re)) {
    return checked_product(parse_coefficient(match[1].str(), text), n, text);
  }
  if (std::regex_match(s, match, quadratic_re)) {
    const std::uint64_t c = parse_coefficient(match[1].str(), text);
    return checked_product(checked_product(c, n, text), n, text);
  }
  if (std::regex_match(s, match, n_log_n_re)) {
    const std::uint64_t c = parse_coefficient(match[1].str(), text);
    return checked_product(checked_product(c, n, text), ceil_log2(n), text);
  }
  throw ParseError("unsupported round expression: '" + std::string(text) +
                   "' (expected a constant, c*n, c*n^2 or c*n*log2(n))");
}

}  // namespace rbb
