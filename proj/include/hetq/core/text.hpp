#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hetq::core {

std::string strip(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Parsers throw CONFIG_ERROR naming `key` on malformed input.
double parse_double(const std::string& text, const std::string& key);
std::int64_t parse_int(const std::string& text, const std::string& key);
std::uint64_t parse_u64(const std::string& text, const std::string& key);
bool parse_bool(const std::string& text, const std::string& key);
std::vector<double> parse_double_list(const std::string& text, const std::string& key);

/// Shortest text that round-trips to the same double.
std::string format_double(double x);

}  // namespace hetq::core
