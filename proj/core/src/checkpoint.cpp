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

#include "probeweight/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "probeweight/errors.hpp"
#include "probeweight/io_util.hpp"

namespace probeweight {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little);

namespace {

constexpr char kMagic[4] = {'P', 'W', 'C', 'K'};

template <typename T>
void append(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view in, std::size_t& at) {
  if (at + sizeof(T) > in.size()) throw FormatError("truncated checkpoint");
  T value;
  std::memcpy(&value, in.data() + at, sizeof(T));
  at += sizeof(T);
  return value;
}

}  // namespace

std::string encode_checkpoint(const CheckpointMeta& meta, const Vector& values) {
  json header = {{"kind", meta.kind},
                 {"version", kCheckpointVersion},
                 {"config", json::parse(meta.config_json)},
                 {"seed", meta.seed},
                 {"step", meta.step}};
  const std::string text = header.dump();
  std::string out(kMagic, 4);
  append<std::uint32_t>(out, kCheckpointVersion);
  append<std::uint64_t>(out, text.size());
  out += text;
  append<std::uint64_t>(out, static_cast<std::uint64_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) {
    append<float>(out, static_cast<float>(values[i]));
  }
  return out;
}

std::pair<CheckpointMeta, Vector> decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad checkpoint magic");
  }
  std::size_t at = 4;
  const auto version = take<std::uint32_t>(bytes, at);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = take<std::uint64_t>(bytes, at);
  if (len > bytes.size() - at) throw FormatError("truncated checkpoint header");
  json header;
  try {
    header = json::parse(bytes.substr(at, len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  }
  at += len;
  const auto count = take<std::uint64_t>(bytes, at);
  if (bytes.size() - at != count * sizeof(float)) {
    throw FormatError("checkpoint payload size mismatch");
  }
  Vector values(static_cast<Index>(count));
  for (Index i = 0; i < values.size(); ++i) values[i] = take<float>(bytes, at);

  CheckpointMeta meta;
  try {
    meta.kind = header.at("kind").get<std::string>();
    meta.config_json = header.at("config").dump();
    meta.seed = header.at("seed").get<std::uint64_t>();
    meta.step = header.at("step").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("incomplete checkpoint header: ") + e.what());
  }
  return {meta, values};
}

void save_classifier_checkpoint(const std::filesystem::path& path,
                                const nn::ClassifierParams& params,
                                std::uint64_t seed, std::int64_t step) {
  json layers = json::array();
  for (const auto& s : params.layout().shapes()) layers.push_back({s.in, s.out});
  CheckpointMeta meta{"classifier", json({{"layers", layers}}).dump(), seed, step};
  write_file_atomic(path, encode_checkpoint(meta, params.values()));
}

nn::ClassifierParams load_classifier_checkpoint(
    const std::filesystem::path& path) {
  auto [meta, values] = decode_checkpoint(read_file(path));
  if (meta.kind != "classifier") {
    throw FormatError(path.string() + " holds a " + meta.kind + " checkpoint");
  }
  const json config = json::parse(meta.config_json);
  std::vector<nn::LayerShape> shapes;
  for (const auto& l : config.at("layers")) {
    shapes.push_back({l.at(0).get<Index>(), l.at(1).get<Index>()});
  }
  return nn::ClassifierParams(nn::ParamLayout(std::move(shapes)),
                              std::move(values));
}

void save_weight_checkpoint(const std::filesystem::path& path,
                            const WeightModel& model, std::uint64_t seed,
                            std::int64_t step) {
  CheckpointMeta meta{model.kind(), model.config_json(), seed, step};
  write_file_atomic(path, encode_checkpoint(meta, model.params()));
}

std::unique_ptr<WeightModel> load_weight_checkpoint(
    const std::filesystem::path& path) {
  auto [meta, values] = decode_checkpoint(read_file(path));
  const json cfg = json::parse(meta.config_json);
  if (meta.kind == "curvenet") {
    CurveNetConfig c;
    c.curve_length = cfg.at("curve_length").get<Index>();
    c.num_classes = cfg.at("num_classes").get<int>();
    c.embed_dim = cfg.at("embed_dim").get<Index>();
    c.encoder_hidden = cfg.at("encoder_hidden").get<Index>();
    c.head_hidden = cfg.at("head_hidden").get<Index>();
    return std::make_unique<CurveNetModel>(CurveNetParams(c, std::move(values)));
  }
  if (meta.kind == "mwnet_transient") {
    return std::make_unique<TransientLossNet>(cfg.at("hidden").get<Index>(),
                                              std::move(values));
  }
  if (meta.kind == "constant") {
    return std::make_unique<ConstantWeight>(cfg.at("value").get<double>());
  }
  throw FormatError("unknown weight model kind '" + meta.kind + "'");
}

}  // namespace probeweight
