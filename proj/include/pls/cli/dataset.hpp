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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pls/types.hpp"

namespace pls::cli {

enum class Task { Regression, Classification, Count };

std::string_view to_string(Task task);

/// Task implied by a likelihood name (bernoulli -> classification,
/// poisson -> count, everything else -> regression).
Task task_for_likelihood(std::string_view likelihood);

struct Dataset {
  Matrix<double> X;
  Vector<double> y;
  std::vector<std::string> columns;  // feature names followed by the target name
  Task task = Task::Regression;
  std::string ground_truth;  // description of the generating process, synthetic data only

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

/// Checks finiteness and the target domain of the task.
void validate_dataset(const Dataset& data);

/// Reads a CSV with a header row; the last column is the target.
Dataset load_csv(const std::filesystem::path& path, Task task = Task::Regression);

/// Reads a CSV with a header row whose columns are all numeric.
Matrix<double> load_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

void write_csv(const std::filesystem::path& path, const Dataset& data);
void write_matrix_csv(const std::filesystem::path& path, const Matrix<double>& values,
                      const std::vector<std::string>& header);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

const std::vector<std::string>& synthetic_names();

/// Latent function of a synthetic problem.
double synthetic_latent(std::string_view name, double x);

/// Generators:
///   sine_regression  f = 2 sin(0.35 pi x^2),  y = f + N(0, 0.2)
///   shift_mixture    f = 2 sin(1.5 pi x),     y = f + 20 z + N(0, 1), z ~ Bernoulli(0.5)
///   poisson_squared  f = 2 sin(1.5 x),        y ~ Poisson(f^2)
/// with x ~ U[-3, 3]. Row i uses its own random stream, so a prefix of a
/// larger draw equals a smaller draw with the same seed.
Dataset gen_synthetic(std::string_view name, Index n, std::uint64_t seed);

/// Random split without replacement; both parts keep the original row order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_frac, std::uint64_t seed);

}  // namespace pls::cli
