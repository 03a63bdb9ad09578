// Copyright 2026 The oppdrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPPDRIVE__CONFIG_FILE_HPP_
#define OPPDRIVE__CONFIG_FILE_HPP_

#include "oppdrive/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace oppdrive
{

/// Parsed `key = value` file, optionally split into `[section]`s.
using ConfigTree = boost::property_tree::ptree;

inline std::string trim(std::string_view s)
{
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) {
    return {};
  }
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

/// Read INI-style text. Lines starting with `#` or `;` are comments.
inline ConfigTree parse_config_text(std::istream & in)
{
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') {
      cleaned << '\n';
      continue;
    }
    if (t.front() != '[' && t.find('=') == std::string::npos) {
      throw ConfigError("malformed line (expected key = value): '" + t + "'");
    }
    cleaned << t << '\n';
  }
  std::istringstream stream(cleaned.str());
  ConfigTree tree;
  try {
    boost::property_tree::read_ini(stream, tree);
  } catch (const boost::property_tree::ini_parser_error & e) {
    throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  return tree;
}

inline ConfigTree load_config_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  return parse_config_text(in);
}

inline double parse_real(std::string_view field, const std::string & text)
{
  const auto t = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError("field '" + std::string(field) + "': expected a number, got '" + t + "'");
  }
  return value;
}

inline long long parse_integer(std::string_view field, const std::string & text)
{
  const auto t = trim(text);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError("field '" + std::string(field) + "': expected an integer, got '" + t + "'");
  }
  return value;
}

inline std::uint64_t parse_unsigned(std::string_view field, const std::string & text)
{
  const auto t = trim(text);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError("field '" + std::string(field) + "': expected a non-negative integer, got '" + t + "'");
  }
  return value;
}

inline bool parse_bool(std::string_view field, const std::string & text)
{
  auto t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    return true;
  }
  if (t == "false" || t == "0" || t == "no" || t == "off") {
    return false;
  }
  throw ConfigError("field '" + std::string(field) + "': expected a boolean, got '" + t + "'");
}

/// "[20, 25, 30]" or "20, 25, 30".
inline std::vector<double> parse_real_list(std::string_view field, const std::string & text)
{
  auto t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') {
      throw ConfigError("field '" + std::string(field) + "': unterminated list '" + t + "'");
    }
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) {
      continue;
    }
    out.push_back(parse_real(field, item));
  }
  return out;
}

/// Shortest text that parses back to the same double.
inline std::string format_real(double value)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline std::string format_real_list(const std::vector<double> & values)
{
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << (i ? ", " : "") << format_real(values[i]);
  }
  out << ']';
  return out.str();
}

}  // namespace oppdrive

#endif  // OPPDRIVE__CONFIG_FILE_HPP_
