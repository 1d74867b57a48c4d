#pragma once

// Small helpers for the tab-separated formats. Numbers are written in the
// shortest form that round-trips.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace linbp::text {

inline std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return value;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

/// True for blank lines and `#` comments.
inline bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

/// Splits on tabs; falls back to runs of spaces when the line has no tab.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  line = trim(line);
  const bool tabs = line.find('\t') != std::string_view::npos;
  const char sep = tabs ? '\t' : ' ';
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) next = line.size();
    auto field = trim(line.substr(pos, next - pos));
    if (!field.empty() || tabs) out.push_back(field);
    pos = next + 1;
  }
  return out;
}

}  // namespace linbp::text
