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

#include "pls/cli/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "pls/errors.hpp"
#include "pls/random.hpp"

namespace pls::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      double v = 0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": column '" + t.header[c] +
                         "' is not numeric ('" + f + "')");
      if (!std::isfinite(v))
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": column '" + t.header[c] +
                         "' holds a non-finite value ('" + f + "')");
      row[c] = v;
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError(path.string() + ": file is empty");
  return t;
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Regression: return "regression";
    case Task::Classification: return "classification";
    case Task::Count: return "count";
  }
  return "?";
}

Task task_for_likelihood(std::string_view likelihood) {
  if (likelihood == "bernoulli") return Task::Classification;
  if (likelihood == "poisson") return Task::Count;
  return Task::Regression;
}

void validate_dataset(const Dataset& data) {
  if (data.X.rows() != data.y.size()) throw InputError("dataset: feature and target row counts differ");
  if (!data.X.allFinite() || !data.y.allFinite()) throw InputError("dataset: values must be finite");
  for (Index i = 0; i < data.y.size(); ++i) {
    const double v = data.y[i];
    if (data.task == Task::Classification && v != 0.0 && v != 1.0)
      throw InputError("dataset: classification target in row " + std::to_string(i + 1) + " is " +
                       format_double(v) + ", expected 0 or 1");
    if (data.task == Task::Count && (v < 0 || v != std::floor(v)))
      throw InputError("dataset: count target in row " + std::to_string(i + 1) + " is " + format_double(v) +
                       ", expected a non-negative integer");
  }
}

Dataset load_csv(const std::filesystem::path& path, Task task) {
  Table t = read_table(path);
  if (t.header.size() < 2) throw InputError(path.string() + ": need at least one feature column and a target column");
  if (t.rows.empty()) throw InputError(path.string() + ": no data rows");
  const auto n = static_cast<Index>(t.rows.size());
  const auto d = static_cast<Index>(t.header.size() - 1);
  Dataset data;
  data.task = task;
  data.columns = t.header;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (Index c = 0; c < d; ++c) data.X(i, c) = row[static_cast<std::size_t>(c)];
    data.y[i] = row.back();
  }
  validate_dataset(data);
  return data;
}

Matrix<double> load_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  Table t = read_table(path);
  Matrix<double> out(static_cast<Index>(t.rows.size()), static_cast<Index>(t.header.size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index c = 0; c < out.cols(); ++c) out(i, c) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  if (header != nullptr) *header = std::move(t.header);
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix<double>& values,
                      const std::vector<std::string>& header) {
  if (static_cast<Index>(header.size()) != values.cols())
    throw InputError("write_matrix_csv: header has " + std::to_string(header.size()) + " names for " +
                     std::to_string(values.cols()) + " columns");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(i, c));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  Matrix<double> all(data.X.rows(), data.X.cols() + 1);
  all << data.X, data.y;
  std::vector<std::string> header = data.columns;
  if (static_cast<Index>(header.size()) != all.cols()) {
    header.clear();
    for (Index c = 0; c < data.X.cols(); ++c) header.push_back("x" + std::to_string(c));
    header.emplace_back("y");
  }
  write_matrix_csv(path, all, header);
}

const std::vector<std::string>& synthetic_names() {
  static const std::vector<std::string> names{"sine_regression", "shift_mixture", "poisson_squared"};
  return names;
}

double synthetic_latent(std::string_view name, double x) {
  constexpr double pi = std::numbers::pi;
  if (name == "sine_regression") return 2.0 * std::sin(0.35 * pi * x * x);
  if (name == "shift_mixture") return 2.0 * std::sin(1.5 * pi * x);
  if (name == "poisson_squared") return 2.0 * std::sin(1.5 * x);
  throw InputError("unknown synthetic dataset '" + std::string(name) +
                   "' (expected sine_regression, shift_mixture or poisson_squared)");
}

Dataset gen_synthetic(std::string_view name, Index n, std::uint64_t seed) {
  synthetic_latent(name, 0.0);
  if (n < 1) throw InputError("gen_synthetic: n must be at least 1");
  Dataset data;
  data.X.resize(n, 1);
  data.y.resize(n);
  data.columns = {"x", "y"};
  for (Index i = 0; i < n; ++i) {
    RandomStream<double> rng(seed, StreamDomain::Synthetic, static_cast<std::uint64_t>(i));
    const double x = -3.0 + 6.0 * rng.uniform();
    const double f = synthetic_latent(name, x);
    double y = 0;
    if (name == "sine_regression") {
      y = f + std::sqrt(0.2) * rng.normal();
    } else if (name == "shift_mixture") {
      const bool shifted = rng.uniform() < 0.5;
      y = f + (shifted ? 20.0 : 0.0) + rng.normal();
    } else {
      std::poisson_distribution<long> pois(f * f);
      y = f * f > 0 ? static_cast<double>(pois(rng.engine())) : 0.0;
    }
    data.X(i, 0) = x;
    data.y[i] = y;
  }
  if (name == "sine_regression") {
    data.task = Task::Regression;
    data.ground_truth = "x ~ U[-3,3]; f(x) = 2 sin(0.35 pi x^2); y = f(x) + e, e ~ N(0, 0.2)";
  } else if (name == "shift_mixture") {
    data.task = Task::Regression;
    data.ground_truth = "x ~ U[-3,3]; f(x) = 2 sin(1.5 pi x); y = f(x) + 20 z + e, z ~ Bernoulli(0.5), e ~ N(0, 1)";
  } else {
    data.task = Task::Count;
    data.ground_truth = "x ~ U[-3,3]; f(x) = 2 sin(1.5 x); y ~ Poisson(f(x)^2)";
  }
  return data;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_frac, std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw InputError("test fraction must lie strictly between 0 and 1");
  const Index n = data.size();
  if (n < 2) throw InputError("need at least two rows to split into train and test sets");
  const Index n_test = std::clamp<Index>(static_cast<Index>(std::llround(test_frac * static_cast<double>(n))), 1, n - 1);

  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  RandomStream<double> rng(seed, StreamDomain::Split, 0);
  for (Index i = 0; i < n_test; ++i) {
    const auto span = static_cast<double>(n - i);
    const Index j = i + std::min<Index>(static_cast<Index>(rng.uniform() * span), n - i - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  std::vector<bool> is_test(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n_test; ++i) is_test[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;

  auto take = [&](bool want_test) {
    Dataset part;
    part.task = data.task;
    part.columns = data.columns;
    part.ground_truth = data.ground_truth;
    const Index count = want_test ? n_test : n - n_test;
    part.X.resize(count, data.dim());
    part.y.resize(count);
    Index r = 0;
    for (Index i = 0; i < n; ++i) {
      if (is_test[static_cast<std::size_t>(i)] != want_test) continue;
      part.X.row(r) = data.X.row(i);
      part.y[r] = data.y[i];
      ++r;
    }
    return part;
  };
  return {take(false), take(true)};
}

}  // namespace pls::cli
