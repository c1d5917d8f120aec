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

// Minimal CSV helpers for the flat, unquoted tables this project reads.

#ifndef AVQA_SRC_CSV_HPP_
#define AVQA_SRC_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace avqa::csv {

std::vector<std::string> split_line(std::string_view line);
std::vector<std::string> split_lines(std::string_view text);

// Both throw DataError with `context` prefixed.
double to_double(const std::string& field, const std::string& context);
long long to_int(const std::string& field, const std::string& context);
bool to_bool(const std::string& field, const std::string& context);

// Shortest round-trippable decimal form.
std::string fmt(double v);

}  // namespace avqa::csv

#endif  // AVQA_SRC_CSV_HPP_
