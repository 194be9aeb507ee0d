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

#include "probeweight/dataset_io.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "probeweight/errors.hpp"
#include "probeweight/io_util.hpp"

namespace probeweight {

using nlohmann::json;

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out = "sample_id,true_label,observed_label,is_noisy";
  for (Index j = 0; j < dataset.dim(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& s : dataset.samples()) {
    out += std::to_string(s.sample_id);
    out += ',';
    out += std::to_string(s.true_label);
    out += ',';
    out += std::to_string(s.observed_label);
    out += s.is_noisy ? ",1" : ",0";
    for (Index j = 0; j < s.features.size(); ++j) {
      out += ',';
      out += format_double(s.features[j]);
    }
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(std::string_view text, int num_classes) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty dataset file");
  const auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "sample_id" ||
      header[1] != "true_label" || header[2] != "observed_label" ||
      header[3] != "is_noisy") {
    throw FormatError("unexpected dataset header '" + line + "'");
  }
  const Index dim = static_cast<Index>(header.size()) - 4;
  for (Index j = 0; j < dim; ++j) {
    if (header[4 + j] != "f" + std::to_string(j)) {
      throw FormatError("unexpected feature column '" +
                        std::string(header[4 + j]) + "'");
    }
  }

  std::vector<Sample> samples;
  ClassId max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (static_cast<Index>(f.size()) != dim + 4) {
      throw FormatError("line " + std::to_string(line_no) + " has " +
                        std::to_string(f.size()) + " fields");
    }
    Sample s;
    s.sample_id = parse_uint(f[0]);
    s.true_label = static_cast<ClassId>(parse_int(f[1]));
    s.observed_label = static_cast<ClassId>(parse_int(f[2]));
    const auto flag = parse_int(f[3]);
    if (flag != 0 && flag != 1) {
      throw FormatError("is_noisy must be 0 or 1 on line " +
                        std::to_string(line_no));
    }
    s.is_noisy = flag == 1;
    s.features.resize(dim);
    for (Index j = 0; j < dim; ++j) s.features[j] = parse_double(f[4 + j]);
    max_label = std::max({max_label, s.true_label, s.observed_label});
    samples.push_back(std::move(s));
  }
  const int k = num_classes > 0 ? num_classes : max_label + 1;
  Dataset out(std::max(k, 1), dim);
  out.reserve(static_cast<Index>(samples.size()));
  for (auto& s : samples) out.add(std::move(s));
  out.validate();
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& csv_path,
                  const DatasetInfo& info) {
  write_file_atomic(csv_path, dataset_to_csv(dataset));
  json j;
  j["K"] = dataset.num_classes();
  j["d"] = dataset.dim();
  j["seed"] = info.seed;
  j["role"] = info.role;
  if (info.bias) {
    const auto& b = *info.bias;
    j["bias"] = {{"imbalance_factor", b.imbalance_factor},
                 {"decay", b.decay(dataset.num_classes())},
                 {"noise_rate", b.noise_rate},
                 {"noise_mode", std::string(to_string(b.noise_mode))},
                 {"seed", b.seed}};
  } else {
    j["bias"] = nullptr;
  }
  write_file_atomic(sidecar_path(csv_path), j.dump(2) + "\n");
}

std::optional<DatasetInfo> load_dataset_info(
    const std::filesystem::path& csv_path) {
  const auto side = sidecar_path(csv_path);
  if (!std::filesystem::exists(side)) return std::nullopt;
  json j;
  try {
    j = json::parse(read_file(side));
  } catch (const json::exception& e) {
    throw FormatError("bad dataset sidecar " + side.string() + ": " + e.what());
  }
  DatasetInfo info;
  info.num_classes = j.at("K").get<int>();
  info.dim = j.at("d").get<Index>();
  info.seed = j.value("seed", std::uint64_t{0});
  info.role = j.value("role", std::string());
  if (j.contains("bias") && !j["bias"].is_null()) {
    BiasConfig b;
    b.imbalance_factor = j["bias"].at("imbalance_factor").get<double>();
    b.noise_rate = j["bias"].at("noise_rate").get<double>();
    b.noise_mode = parse_noise_mode(j["bias"].at("noise_mode").get<std::string>());
    b.seed = j["bias"].at("seed").get<std::uint64_t>();
    info.bias = b;
  }
  return info;
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
  const auto info = load_dataset_info(csv_path);
  Dataset d = dataset_from_csv(read_file(csv_path),
                               info ? info->num_classes : 0);
  if (info && info->dim != d.dim()) {
    throw FormatError("sidecar dimension does not match " + csv_path.string());
  }
  return d;
}

}  // namespace probeweight
