#include "hetq/core/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "hetq/error.hpp"

namespace hetq::core {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(strip(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string s = strip(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(), ErrorCode::ConfigError,
          "key '" + key + "': expected a number, got '" + text + "'");
  return value;
}

std::int64_t parse_int(const std::string& text, const std::string& key) {
  const std::string s = strip(text);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(), ErrorCode::ConfigError,
          "key '" + key + "': expected an integer, got '" + text + "'");
  return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  const std::string s = strip(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(), ErrorCode::ConfigError,
          "key '" + key + "': expected an unsigned integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const std::string s = strip(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(ErrorCode::ConfigError, "key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(part, key));
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace hetq::core
