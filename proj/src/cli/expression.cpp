#include "kpo/cli/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace kpo::cli {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  double parse() {
    const double v = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad expression \"" + std::string(text_) + "\": " + why);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double sum() {
    double v = product();
    while (true) {
      if (accept('+')) {
        v += product();
      } else if (accept('-')) {
        v -= product();
      } else {
        return v;
      }
    }
  }

  double product() {
    double v = unary();
    while (true) {
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  // Right associative; binds tighter than unary minus on its left.
  double power() {
    const double base = primary();
    if (accept('^')) return std::pow(base, unary());
    return base;
  }

  double primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (accept('(')) {
      const double v = sum();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return named();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  double number() {
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  double named() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "pi") return std::numbers::pi;
    if (name == "e") return std::numbers::e;
    if (!accept('(')) fail("unknown name '" + std::string(name) + "'");
    const double arg = sum();
    if (!accept(')')) fail("missing ')'");
    if (name == "sqrt") return std::sqrt(arg);
    if (name == "exp") return std::exp(arg);
    if (name == "log") return std::log(arg);
    if (name == "sin") return std::sin(arg);
    if (name == "cos") return std::cos(arg);
    if (name == "tan") return std::tan(arg);
    if (name == "abs") return std::abs(arg);
    fail("unknown function '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    parts.push_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double evaluate(std::string_view text) {
  const double v = Parser(text).parse();
  if (!std::isfinite(v)) throw ConfigError("expression \"" + std::string(text) + "\" is not finite");
  return v;
}

std::vector<double> Range::values() const {
  if (count == 1) return {start};
  std::vector<double> v(count);
  const double last = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / last;
    v[i] = spacing == Spacing::linear ? start + (stop - start) * t
                                      : start * std::pow(stop / start, t);
  }
  v.back() = stop;
  return v;
}

bool looks_like_range(std::string_view text) { return text.find(':') != std::string_view::npos; }

Range parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3 && parts.size() != 4) {
    throw ConfigError("range \"" + std::string(text) + "\" must be start:stop:count[:lin|geom]");
  }
  Range r;
  r.start = evaluate(parts[0]);
  r.stop = evaluate(parts[1]);
  const std::string_view count = trim(parts[2]);
  unsigned long long n = 0;
  const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
  if (ec != std::errc() || ptr != count.data() + count.size() || n == 0) {
    throw ConfigError("range \"" + std::string(text) + "\" needs a positive integer count");
  }
  r.count = static_cast<std::size_t>(n);
  if (parts.size() == 4) {
    const std::string_view kind = trim(parts[3]);
    if (kind == "lin") {
      r.spacing = Spacing::linear;
    } else if (kind == "geom") {
      r.spacing = Spacing::geometric;
    } else {
      throw ConfigError("range spacing must be lin or geom, got \"" + std::string(kind) + "\"");
    }
  }
  if (r.spacing == Spacing::geometric && !(r.start > 0 && r.stop > 0)) {
    throw ConfigError("geometric ranges need positive endpoints");
  }
  if (r.count > 1 && r.start == r.stop) throw ConfigError("range endpoints coincide");
  return r;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> values;
  if (trim(text).empty()) return values;
  for (std::string_view part : split(text, ',')) values.push_back(evaluate(part));
  return values;
}

}  // namespace kpo::cli
