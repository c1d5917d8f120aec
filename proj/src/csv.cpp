/*
 * Copyright 2026 The avqa Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "avqa/error.hpp"

namespace avqa::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(trim(line.substr(start)));
      break;
    }
    out.emplace_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(start, nl - start));
    lines.emplace_back(line);
    start = nl + 1;
  }
  // Drop trailing blank lines only; interior blanks are reported by callers.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double to_double(const std::string& field, const std::string& context) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw DataError(context + ": not a number: '" + field + "'");
  }
  return v;
}

long long to_int(const std::string& field, const std::string& context) {
  long long v = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw DataError(context + ": not an integer: '" + field + "'");
  }
  return v;
}

bool to_bool(const std::string& field, const std::string& context) {
  if (field == "1" || field == "true" || field == "True" || field == "TRUE") return true;
  if (field == "0" || field == "false" || field == "False" || field == "FALSE") return false;
  throw DataError(context + ": not a boolean: '" + field + "'");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace avqa::csv
