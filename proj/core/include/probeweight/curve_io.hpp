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

// Binary loss-curve file, little-endian:
//
//   offset  size  field
//   0       4     magic "PACV"
//   4       4     version (u32, currently 1)
//   8       8     N, number of samples (u64)
//   16      4     T, number of epochs (u32)
//   20      4     label bits (u32, 16)
//   24      4     CRC-32 of everything after the header (u32)
//   28      4     reserved, zero
//   32      N*T*4 losses, f32, row-major (sample-major)
//   ...     N*8   sample ids, u64
//   ...     N*2   observed labels, u16

#ifndef PROBEWEIGHT_CURVE_IO_HPP_
#define PROBEWEIGHT_CURVE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "probeweight/curves.hpp"

namespace probeweight {

inline constexpr std::uint32_t kCurveFormatVersion = 1;
inline constexpr std::size_t kCurveHeaderBytes = 32;

std::string encode_curves(const LossCurveMatrix& curves);
LossCurveMatrix decode_curves(std::string_view bytes);

void save_curves(const LossCurveMatrix& curves,
                 const std::filesystem::path& path);
LossCurveMatrix load_curves(const std::filesystem::path& path);

}  // namespace probeweight

#endif  // PROBEWEIGHT_CURVE_IO_HPP_
