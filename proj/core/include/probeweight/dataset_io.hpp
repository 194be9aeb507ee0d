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

// Dataset files: a CSV with header
//   sample_id,true_label,observed_label,is_noisy,f0,...,f{d-1}
// and a JSON sidecar next to it (same stem, .json extension) holding K, d,
// the bias configuration and the generator seed.

#ifndef PROBEWEIGHT_DATASET_IO_HPP_
#define PROBEWEIGHT_DATASET_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "probeweight/biasgen.hpp"
#include "probeweight/dataset.hpp"

namespace probeweight {

struct DatasetInfo {
  int num_classes = 0;
  Index dim = 0;
  std::optional<BiasConfig> bias;
  std::uint64_t seed = 0;
  std::string role;
};

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

std::string dataset_to_csv(const Dataset& dataset);
Dataset dataset_from_csv(std::string_view text, int num_classes);

void save_dataset(const Dataset& dataset, const std::filesystem::path& csv_path,
                  const DatasetInfo& info);

// Reads the sidecar when present; otherwise K is inferred as max label + 1.
Dataset load_dataset(const std::filesystem::path& csv_path);
std::optional<DatasetInfo> load_dataset_info(
    const std::filesystem::path& csv_path);

}  // namespace probeweight

#endif  // PROBEWEIGHT_DATASET_IO_HPP_
