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

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

std::string sha256_hex(std::string_view data);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_on(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Calls fn(line_number, line) for every non-blank line; line numbers are
// 1-based. Throws InputError on a missing file.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const std::string&)>& fn);

// printf-style fixed/short float formatting for CSV output; snprintf is
// locale-independent for the C locale and stable across platforms.
std::string format_fixed(double value, int decimals);
std::string format_general(double value, int significant);

std::string iso8601_utc_now();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown on the caller thread (first one wins).
void run_parallel(std::size_t workers, std::size_t n,
                  const std::function<void(std::size_t)>& fn);

}  // namespace stance
