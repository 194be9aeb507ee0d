// Copyright 2026 The ProbeWeight Authors
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

#ifndef PROBEWEIGHT_IO_UTIL_HPP_
#define PROBEWEIGHT_IO_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probeweight {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

// Plain comma split; fields never contain quotes or commas in our files.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over path.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::uint32_t crc32_of(std::span<const unsigned char> bytes);

}  // namespace probeweight

#endif  // PROBEWEIGHT_IO_UTIL_HPP_
