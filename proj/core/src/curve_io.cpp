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

#include "probeweight/curve_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "probeweight/errors.hpp"
#include "probeweight/io_util.hpp"

namespace probeweight {

static_assert(std::endian::native == std::endian::little,
              "curve files are written with host byte order");

namespace {

constexpr char kMagic[4] = {'P', 'A', 'C', 'V'};
constexpr std::uint32_t kLabelBits = 16;

template <typename T>
void put(std::string& out, std::size_t at, T value) {
  std::memcpy(out.data() + at, &value, sizeof(T));
}

template <typename T>
T get(std::string_view in, std::size_t at) {
  T value;
  std::memcpy(&value, in.data() + at, sizeof(T));
  return value;
}

std::span<const unsigned char> as_bytes(std::string_view s) {
  return {reinterpret_cast<const unsigned char*>(s.data()), s.size()};
}

}  // namespace

std::string encode_curves(const LossCurveMatrix& curves) {
  const auto n = static_cast<std::uint64_t>(curves.num_samples());
  const auto t = static_cast<std::uint32_t>(curves.epochs());
  if (curves.sample_ids.size() != n || curves.observed_labels.size() != n) {
    throw ShapeError("curve ids and labels must match the number of rows");
  }
  if (!curves.losses.allFinite()) {
    throw NumericError("cannot save non-finite curve entries");
  }
  const std::size_t loss_bytes = n * t * sizeof(float);
  std::string out(kCurveHeaderBytes + loss_bytes + n * 8 + n * 2, '\0');
  std::memcpy(out.data(), kMagic, 4);
  put<std::uint32_t>(out, 4, kCurveFormatVersion);
  put<std::uint64_t>(out, 8, n);
  put<std::uint32_t>(out, 16, t);
  put<std::uint32_t>(out, 20, kLabelBits);

  std::size_t at = kCurveHeaderBytes;
  if (loss_bytes > 0) std::memcpy(out.data() + at, curves.losses.data(), loss_bytes);
  at += loss_bytes;
  for (auto id : curves.sample_ids) {
    put<std::uint64_t>(out, at, id);
    at += 8;
  }
  for (auto label : curves.observed_labels) {
    if (label < 0 || label > std::numeric_limits<std::uint16_t>::max()) {
      throw DomainError("label does not fit in 16 bits");
    }
    put<std::uint16_t>(out, at, static_cast<std::uint16_t>(label));
    at += 2;
  }
  const auto payload = std::string_view(out).substr(kCurveHeaderBytes);
  put<std::uint32_t>(out, 24, crc32_of(as_bytes(payload)));
  return out;
}

LossCurveMatrix decode_curves(std::string_view bytes) {
  if (bytes.size() < kCurveHeaderBytes) throw FormatError("truncated curve header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic in curve file");
  }
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kCurveFormatVersion) {
    throw FormatError("unsupported curve file version " + std::to_string(version));
  }
  const auto n = get<std::uint64_t>(bytes, 8);
  const auto t = get<std::uint32_t>(bytes, 16);
  if (get<std::uint32_t>(bytes, 20) != kLabelBits) {
    throw FormatError("unsupported label width in curve file");
  }
  // Guard the size arithmetic against absurd headers before multiplying.
  if (t == 0 || n > bytes.size() || t > bytes.size()) {
    throw FormatError("curve header sizes do not match the payload");
  }
  const std::size_t expected = kCurveHeaderBytes + n * t * 4 + n * 8 + n * 2;
  if (bytes.size() != expected) {
    throw FormatError("curve payload is " + std::to_string(bytes.size()) +
                      " bytes, header implies " + std::to_string(expected));
  }
  const auto payload = bytes.substr(kCurveHeaderBytes);
  if (crc32_of(as_bytes(payload)) != get<std::uint32_t>(bytes, 24)) {
    throw FormatError("curve file checksum mismatch");
  }

  LossCurveMatrix curves;
  curves.losses.resize(static_cast<Index>(n), static_cast<Index>(t));
  std::size_t at = kCurveHeaderBytes;
  std::memcpy(curves.losses.data(), bytes.data() + at, n * t * 4);
  at += n * t * 4;
  curves.sample_ids.resize(n);
  for (auto& id : curves.sample_ids) {
    id = get<std::uint64_t>(bytes, at);
    at += 8;
  }
  curves.observed_labels.resize(n);
  for (auto& label : curves.observed_labels) {
    label = get<std::uint16_t>(bytes, at);
    at += 2;
  }
  if (!curves.losses.allFinite()) throw FormatError("non-finite curve entry");
  return curves;
}

void save_curves(const LossCurveMatrix& curves,
                 const std::filesystem::path& path) {
  write_file_atomic(path, encode_curves(curves));
}

LossCurveMatrix load_curves(const std::filesystem::path& path) {
  return decode_curves(read_file(path));
}

}  // namespace probeweight
