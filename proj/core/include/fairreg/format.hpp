// Copyright 2026 The fairreg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRREG_FORMAT_HPP_
#define FAIRREG_FORMAT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairreg {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Parses a full decimal field (surrounding blanks allowed). nullopt when
// the text is not a number.
std::optional<double> parse_double(std::string_view text);

// Splits one CSV record. Handles double-quoted fields with "" escapes and
// strips a trailing carriage return.
std::vector<std::string> split_csv_record(std::string_view line);

std::string_view trim(std::string_view s);

}  // namespace fairreg

#endif  // FAIRREG_FORMAT_HPP_
