#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kpo/cli/error.hpp"

namespace kpo::cli {

// Arithmetic over doubles: + - * / ^, parentheses, unary signs, the
// constants pi and e, and sqrt exp log sin cos tan abs. Throws
// ConfigError on malformed input or non-finite results.
double evaluate(std::string_view text);

enum class Spacing { linear, geometric };

// start:stop:count with an optional :lin or :geom suffix; start and stop are
// expressions. count >= 1; with count == 1 the grid is {start}.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;
  Spacing spacing = Spacing::linear;

  std::vector<double> values() const;
  bool operator==(const Range&) const = default;
};

bool looks_like_range(std::string_view text);
Range parse_range(std::string_view text);

// Comma-separated expressions.
std::vector<double> parse_list(std::string_view text);

}  // namespace kpo::cli
