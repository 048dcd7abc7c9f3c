/*
 * Copyright 2026 The pls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>

#include "json.hpp"
#include "pls/diagnostics.hpp"
#include "pls/spectral.hpp"

namespace pls::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json to_json(const Kernel<double>& k);
Kernel<double> kernel_from_json(const json& j);

json to_json(const SpectralBasis<double>& basis);
SpectralBasis<double> basis_from_json(const json& j);

json to_json(const MetricReport<double>& report);
json to_json(const BoundReport<double>& report);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& value);

}  // namespace pls::cli
