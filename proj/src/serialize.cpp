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

#include "pls/cli/serialize.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "pls/errors.hpp"

namespace pls::cli {

namespace {

json vector_json(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json rows_json(const Matrix<double>& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(i, c);
    out.push_back(std::move(row));
  }
  return out;
}

Vector<double> vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string("basis JSON: '") + what + "' must be an array");
  Vector<double> v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

Matrix<double> rows_from(const json& j, Index cols, const char* what) {
  if (!j.is_array()) throw InputError(std::string("basis JSON: '") + what + "' must be an array of rows");
  Matrix<double> m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || static_cast<Index>(j[i].size()) != cols)
      throw InputError(std::string("basis JSON: row ") + std::to_string(i) + " of '" + what + "' has the wrong length");
    for (Index c = 0; c < cols; ++c) m(static_cast<Index>(i), c) = j[i][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

json to_json(const Kernel<double>& k) {
  return {{"family", std::string(to_string(k.family()))},
          {"lengthscales", vector_json(k.lengthscales())},
          {"signal_variance", k.signal_variance()}};
}

Kernel<double> kernel_from_json(const json& j) {
  try {
    return Kernel<double>(kernel_family_from_string(j.at("family").get<std::string>()),
                          vector_from(j.at("lengthscales"), "lengthscales"), j.at("signal_variance").get<double>());
  } catch (const json::exception& e) {
    throw InputError(std::string("kernel JSON: ") + e.what());
  }
}

json to_json(const SpectralBasis<double>& basis) {
  return {{"schema_version", kSchemaVersion},
          {"kernel", to_json(basis.kernel)},
          {"inducing", rows_json(basis.inducing)},
          {"eigenvalues", vector_json(basis.eigenvalues)},
          {"weights", rows_json(basis.weights)},
          {"duplicates_removed", basis.duplicates_removed}};
}

SpectralBasis<double> basis_from_json(const json& j) {
  try {
    Kernel<double> k = kernel_from_json(j.at("kernel"));
    Vector<double> evals = vector_from(j.at("eigenvalues"), "eigenvalues");
    Matrix<double> z = rows_from(j.at("inducing"), k.dim(), "inducing");
    Matrix<double> w = rows_from(j.at("weights"), evals.size(), "weights");
    if (w.rows() != z.rows()) throw InputError("basis JSON: weights and inducing points differ in row count");
    if (evals.size() > 0 && !(evals.minCoeff() > 0)) throw InputError("basis JSON: eigenvalues must be positive");
    return {std::move(k), std::move(z), std::move(evals), std::move(w), j.value("duplicates_removed", Index{0})};
  } catch (const json::exception& e) {
    throw InputError(std::string("basis JSON: ") + e.what());
  }
}

json to_json(const MetricReport<double>& report) {
  json j{{"nll", report.nll},
         {"mae", report.mae},
         {"interval_width_95", report.interval_width_95},
         {"interval_includes_noise", report.interval_includes_noise},
         {"accuracy", nullptr},
         {"auc", nullptr}};
  if (report.accuracy) j["accuracy"] = *report.accuracy;
  if (report.auc) j["auc"] = *report.auc;
  return j;
}

json to_json(const BoundReport<double>& report) {
  return {{"kappa", report.kappa},
          {"trace_sigma", report.trace_sigma},
          {"bound", report.bound},
          {"clamped_entries", report.clamped_entries},
          {"per_point_diag", vector_json(report.per_point_diag)}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << value.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace pls::cli
