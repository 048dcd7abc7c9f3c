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

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "pls/model_selection.hpp"
#include "test_util.hpp"

namespace pls {
namespace {

using testing::uniform_points;

Matrix<double> column(std::initializer_list<double> v) {
  Matrix<double> out(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) out(i++, 0) = x;
  return out;
}

TEST(MedianHeuristic, Examples) {
  EXPECT_DOUBLE_EQ(median_heuristic(column({0.0, 2.0}))[0], 2.0);
  EXPECT_DOUBLE_EQ(median_heuristic(column({1.0, 1.0, 1.0}))[0], 1.0);
  EXPECT_DOUBLE_EQ(median_heuristic(column({0.0, 1.0, 2.0, 3.0}))[0], 1.5);
  EXPECT_THROW(median_heuristic(column({1.0})), InputError);
}

TEST(MedianHeuristic, PerDimensionAndSubsampled) {
  Matrix<double> x = uniform_points(400, 2, 1);
  x.col(1) *= 10.0;
  const Vector<double> full = median_heuristic(x, 0, 1000000);
  const Vector<double> sub = median_heuristic(x, 3, 5000);
  EXPECT_NEAR(full[1] / full[0], 10.0, 2.0);
  EXPECT_NEAR(sub[0], full[0], 0.1 * full[0]);
  EXPECT_NEAR(sub[1], full[1], 0.1 * full[1]);
  EXPECT_EQ(median_heuristic(x, 3, 5000), sub);
}

TEST(LogMarginalLikelihood, MatchesDenseFormula) {
  const Matrix<double> x = uniform_points(5, 1, 2);
  const Vector<double> y = x.col(0).array().cos();
  const Kernel<double> k = Kernel<double>::isotropic(KernelFamily::Matern52, 1, 0.8, 1.3);
  const double s2 = 0.05;
  Matrix<double> c(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) c(i, j) = k(x.row(i), x.row(j)) + (i == j ? s2 : 0.0);
  const double expected = -0.5 * y.dot(c.inverse() * y) - 0.5 * std::log(c.determinant()) -
                          2.5 * std::log(2 * std::numbers::pi);
  EXPECT_NEAR(log_marginal_likelihood(k, x, y, s2), expected, 1e-8);
  EXPECT_THROW(log_marginal_likelihood(k, x, Vector<double>(4), s2), InputError);
}

TEST(FitHyperparams, SingleCandidateIsReturned) {
  const Matrix<double> x = uniform_points(30, 1, 3);
  const Vector<double> y = x.col(0).array().sin();
  HyperparamSearchConfig<double> cfg;
  cfg.grid.lengthscales = {Vector<double>::Constant(1, 0.7)};
  cfg.grid.signal_variances = {1.4};
  cfg.grid.noise_variances = {0.02};
  const auto fit = fit_hyperparams(x, y, cfg);
  EXPECT_DOUBLE_EQ(fit.kernel.lengthscales()[0], 0.7);
  EXPECT_DOUBLE_EQ(fit.kernel.signal_variance(), 1.4);
  EXPECT_DOUBLE_EQ(fit.noise_variance, 0.02);
  EXPECT_EQ(fit.per_repeat.size(), 1u);  // N <= subset size
}

TEST(FitHyperparams, AveragesRepeatsGeometrically) {
  const Matrix<double> x = uniform_points(120, 1, 4);
  const Vector<double> y = (2.0 * x.col(0).array()).sin() * x.col(0).array();
  HyperparamSearchConfig<double> cfg;
  cfg.subset_size = 25;
  cfg.n_repeats = 6;
  cfg.seed = 8;
  cfg.grid = HyperparamGrid<double>::around(x, y);
  EXPECT_EQ(cfg.grid.size(), 45u);
  const auto fit = fit_hyperparams(x, y, cfg);
  ASSERT_EQ(fit.per_repeat.size(), 6u);
  double ll = 0, lsv = 0, lnv = 0;
  for (const auto& p : fit.per_repeat) {
    ll += std::log(p.lengthscales[0]);
    lsv += std::log(p.signal_variance);
    lnv += std::log(p.noise_variance);
  }
  EXPECT_NEAR(fit.kernel.lengthscales()[0], std::exp(ll / 6), 1e-12);
  EXPECT_NEAR(fit.kernel.signal_variance(), std::exp(lsv / 6), 1e-12);
  EXPECT_NEAR(fit.noise_variance, std::exp(lnv / 6), 1e-12);
  const auto again = fit_hyperparams(x, y, cfg);
  EXPECT_EQ(again.kernel.lengthscales(), fit.kernel.lengthscales());
}

TEST(FitHyperparams, RecoversGeneratingLengthscale) {
  const Kernel<double> truth = Kernel<double>::isotropic(KernelFamily::SquaredExponential, 1, 0.5, 1.0);
  HyperparamSearchConfig<double> cfg;
  cfg.grid.lengthscales = {Vector<double>::Constant(1, 0.1), Vector<double>::Constant(1, 0.5),
                           Vector<double>::Constant(1, 2.5)};
  cfg.grid.signal_variances = {1.0};
  cfg.grid.noise_variances = {0.01};
  int hits = 0;
  for (std::uint64_t run = 0; run < 10; ++run) {
    const Matrix<double> x = uniform_points(150, 1, 100 + run);
    Matrix<double> c = gram(truth, x, x);
    c.diagonal().array() += 0.01;
    const Matrix<double> l = c.llt().matrixL();
    const Vector<double> y = l * testing::gaussian_matrix(150, 1, 200 + run).col(0);
    if (std::abs(fit_hyperparams(x, y, cfg).kernel.lengthscales()[0] - 0.5) < 1e-12) ++hits;
  }
  EXPECT_GE(hits, 8);
}

TEST(FitHyperparams, RejectsBadConfig) {
  const Matrix<double> x = uniform_points(10, 1, 5);
  const Vector<double> y = x.col(0);
  HyperparamSearchConfig<double> cfg;
  EXPECT_THROW(fit_hyperparams(x, y, cfg), InputError);  // empty grid
  cfg.grid = HyperparamGrid<double>::around(x, y);
  EXPECT_THROW(fit_hyperparams(x, Vector<double>(9), cfg), InputError);
  cfg.grid.lengthscales = {Vector<double>::Ones(2)};
  EXPECT_THROW(fit_hyperparams(x, y, cfg), InputError);
  const auto cls = HyperparamSearchConfig<double>::classification();
  EXPECT_EQ(cls.subset_size, 1000);
  EXPECT_EQ(cls.n_repeats, 5);
}

}  // namespace
}  // namespace pls
