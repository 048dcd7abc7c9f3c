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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pls/cli/dataset.hpp"
#include "pls/cli/serialize.hpp"
#include "pls/kernels.hpp"
#include "pls/likelihoods.hpp"

namespace pls::cli {

/// Everything a run depends on. Unset optionals are derived from the data.
struct RunConfig {
  // data: exactly one of data_path / synthetic
  std::string data_path;
  std::string synthetic;
  Index synthetic_n = 200;
  double test_frac = 0.2;

  std::string kernel = "se";
  std::vector<double> lengthscales;  // empty: median heuristic; one value: isotropic
  double signal_var = 1.0;

  std::string likelihood = "gaussian";
  double noise_var = 0.2;  // Gaussian / shift-mixture variance; squared Student-t scale
  double dof = 4.0;
  double shift = 20.0;
  double mix_alpha = 0.5;
  std::optional<double> curvature;

  Index inducing = 0;  // 0: ceil(sqrt(N_train))
  std::string select = "greedy";
  double rank_floor = 1e-10;

  std::optional<double> eta;
  Index steps = 1000;
  std::optional<double> horizon;  // overrides steps with ceil(horizon / eta)
  Index particles = 100;
  std::string init = "prior";

  std::optional<double> kappa;
  Index potential_mc = 0;  // V* estimate at the particle mean; 0 disables

  bool tune = false;
  std::string tune_grid;  // optional JSON grid override
  std::uint64_t seed = 0;
  std::string out_dir = "pls_out";
};

Likelihood<double> make_likelihood(const RunConfig& cfg);

/// Fails fast on any invalid parameter before data is loaded.
void validate(const RunConfig& cfg);

json config_to_json(const RunConfig& cfg);

struct PhaseTimings {
  double select = 0;
  double decompose = 0;
  double simulate = 0;
  double predict = 0;
};

struct RunSummary {
  Index n_train = 0;
  Index n_test = 0;
  Index basis_size = 0;
  double step_size = 0;
  Index steps = 0;
  PhaseTimings timings;
  std::vector<std::string> warnings;
};

/// select -> fit -> simulate -> predict -> diagnose, writing basis.json,
/// coeffs.csv, predictions.csv, test_points.csv, metrics.json,
/// diagnostics.json and manifest.json into cfg.out_dir.
RunSummary run_pipeline(const RunConfig& cfg);

/// Matheron draws at new inputs from saved artifacts.
void predict_from_artifacts(const std::filesystem::path& basis_json, const std::filesystem::path& coeffs_csv,
                            const std::filesystem::path& points_csv, const std::filesystem::path& out_csv,
                            std::uint64_t seed);

struct ScalingSweep {
  std::vector<Index> n_values;
  std::vector<Index> m_values;
  std::vector<Index> j_values;
};

struct ScalingRow {
  std::string sweep;
  Index n = 0;
  Index m = 0;
  Index j = 0;
  PhaseTimings timings;
};

/// Per-phase wall-clock times over each sweep list, the other parameters
/// held at their cfg values; data is sine_regression.
std::vector<ScalingRow> scaling_report(const RunConfig& cfg, const ScalingSweep& sweep);
void write_scaling_csv(const std::filesystem::path& path, const std::vector<ScalingRow>& rows);

std::string version_string();

/// Exit code for an exception escaping the pipeline (1 input, 2 numerical, 3 io).
int exit_code_for(const std::exception& e);

}  // namespace pls::cli
