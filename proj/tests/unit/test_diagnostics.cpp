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

#include <gtest/gtest.h>

#include "pls/diagnostics.hpp"
#include "pls/sampler.hpp"
#include "test_util.hpp"

namespace pls {
namespace {

using testing::gaussian_matrix;
using testing::uniform_points;

const Kernel<double> kSe = Kernel<double>::isotropic(KernelFamily::SquaredExponential, 1, 1.0, 1.0);

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(GaussianOracle, NoDataIsThePrior) {
  const auto post = gaussian_oracle(Matrix<double>(3, 0), vec({2.0, 1.0, 0.5}), Vector<double>(0), 0.1);
  EXPECT_TRUE(post.mean.isZero(0.0));
  EXPECT_TRUE(post.covariance.isApprox(Matrix<double>(vec({2.0, 1.0, 0.5}).asDiagonal())));
}

TEST(GaussianOracle, ScalarCase) {
  // precision 1/1 + 1/1 = 2
  Matrix<double> e(1, 1);
  e << 1.0;
  const auto post = gaussian_oracle(e, vec({1.0}), vec({2.0}), 1.0);
  EXPECT_DOUBLE_EQ(post.covariance(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(post.mean[0], 1.0);
}

TEST(GaussianOracle, MatchesBayesianLinearRegression) {
  // Woodbury form: Sigma = L - L E (s2 I + E^T L E)^-1 E^T L
  const Matrix<double> e = gaussian_matrix(3, 5, 1);
  const Vector<double> lambda = vec({1.2, 0.4, 0.05});
  const Vector<double> y = gaussian_matrix(5, 1, 2).col(0);
  const double s2 = 0.3;
  const Matrix<double> l = lambda.asDiagonal();
  const Matrix<double> inner = s2 * Matrix<double>::Identity(5, 5) + e.transpose() * l * e;
  const Matrix<double> cov = l - l * e * inner.ldlt().solve(e.transpose() * l);
  const Vector<double> mean = l * e * inner.ldlt().solve(y);
  const auto post = gaussian_oracle(e, lambda, y, s2);
  EXPECT_TRUE(post.covariance.isApprox(cov, 1e-12));
  EXPECT_TRUE(post.mean.isApprox(mean, 1e-12));
  EXPECT_THROW(gaussian_oracle(e, lambda, y, 0.0), InputError);
  EXPECT_THROW(gaussian_oracle(e, vec({1.0}), y, 1.0), InputError);
}

TEST(KlBound, ExactWhenInducingEqualsData) {
  const Matrix<double> x = uniform_points(12, 1, 3, -1.0, 1.0);
  const Kernel<double> k = Kernel<double>::isotropic(KernelFamily::Matern32, 1, 0.4, 1.0);
  const auto basis = fit_nystroem(k, x, 0.0);
  ASSERT_EQ(basis.size(), 12);
  const auto rep = kl_bound(basis, k, x, 1.0);
  EXPECT_LT(rep.trace_sigma, 1e-9);
  EXPECT_NEAR(rep.bound, 0.5 * rep.trace_sigma, 1e-18);
}

TEST(KlBound, ScalesWithKappaSquared) {
  const Matrix<double> x = uniform_points(40, 1, 4);
  const auto basis = fit_nystroem(kSe, Matrix<double>(x.topRows(4)));
  const auto a = kl_bound(basis, kSe, x, 1.0);
  const auto b = kl_bound(basis, kSe, x, 3.0);
  EXPECT_NEAR(b.bound, 9.0 * a.bound, 1e-12 * b.bound);
  EXPECT_EQ(a.trace_sigma, b.trace_sigma);
  EXPECT_GE(a.trace_sigma, 0.0);
  EXPECT_THROW(kl_bound(basis, kSe, x, 0.0), InputError);
  EXPECT_THROW(kl_bound(basis, kSe, Matrix<double>(0, 1), 1.0), InputError);
  EXPECT_DOUBLE_EQ(bernoulli_kappa<double>(16), 4.0);
}

TEST(KlBound, DiagonalMatchesSigmaMatrix) {
  const Matrix<double> x = uniform_points(25, 2, 5);
  const Kernel<double> k = Kernel<double>::isotropic(KernelFamily::Matern52, 2, 1.3, 0.8);
  const auto basis = fit_nystroem(k, Matrix<double>(x.topRows(5)));
  const auto anchors = AnchorSet<double>::from_training(x);
  const auto rep = kl_bound(basis, k, x, 1.0, anchors);
  const Vector<double> diag = sigma_matrix(basis, k, x, anchors).diagonal().cwiseMax(0.0);
  EXPECT_TRUE(rep.per_point_diag.isApprox(diag, 1e-12));
}

// Values from tests/oracles/kl_trace_grid.py (greedy Z on a 200-point grid).
TEST(KlBound, GreedyGridFixtures) {
  const Matrix<double> x = Matrix<double>(Vector<double>::LinSpaced(200, -3.0, 3.0));
  struct Case {
    Index m;
    double trace;
    Index clamped;
  };
  for (const Case& c : {Case{5, 7.859483483988065, 37}, Case{10, 6.937962567424626, 51}}) {
    const auto basis = fit_nystroem(kSe, select_inducing_greedy(kSe, x, c.m));
    const auto rep = kl_bound(basis, kSe, x, 1.0);
    EXPECT_NEAR(rep.trace_sigma, c.trace, 1e-9 * c.trace) << "M=" << c.m;
    EXPECT_EQ(rep.clamped_entries, c.clamped) << "M=" << c.m;
  }
}

TEST(TailDecay, GeometricSpectrum) {
  Vector<double> lambda(12);
  for (Index m = 0; m < 12; ++m) lambda[m] = std::pow(2.0, -static_cast<double>(m + 1));
  const auto fit = tail_decay_fit(lambda);
  EXPECT_NEAR(fit.exp_slope, -std::log(2.0), 1e-12);
  EXPECT_NEAR(fit.exp_r2, 1.0, 1e-12);
  EXPECT_LT(fit.poly_r2, 1.0);
  EXPECT_THROW(tail_decay_fit(Vector<double>(lambda.head(9))), InputError);
}

TEST(TailDecay, PowerLawSpectrum) {
  Vector<double> lambda(15);
  for (Index m = 0; m < 15; ++m) lambda[m] = std::pow(static_cast<double>(m + 1), -3.0);
  const auto fit = tail_decay_fit(lambda);
  EXPECT_NEAR(fit.poly_slope, -3.0, 1e-12);
  EXPECT_NEAR(fit.poly_r2, 1.0, 1e-12);
}

TEST(Potential, GradientMatchesFiniteDifferences) {
  const Matrix<double> e = gaussian_matrix(4, 6, 6);
  const Vector<double> lambda = vec({1.0, 0.6, 0.3, 0.1});
  for (const Likelihood<double>& lik : {Likelihood<double>(Gaussian<double>(0.5)),
                                        Likelihood<double>(BernoulliLogistic<double>()),
                                        Likelihood<double>(StudentT<double>(3.0, 0.7))}) {
    const Vector<double> y = std::holds_alternative<BernoulliLogistic<double>>(lik)
                                 ? vec({0, 1, 1, 0, 1, 0})
                                 : Vector<double>(gaussian_matrix(6, 1, 7).col(0));
    const Vector<double> u = gaussian_matrix(4, 1, 8).col(0);
    const Vector<double> g = stationary_potential_gradient(e, lambda, y, lik, u);
    for (Index m = 0; m < 4; ++m) {
      Vector<double> up = u, dn = u;
      up[m] += 1e-6;
      dn[m] -= 1e-6;
      const double fd =
          (stationary_potential(e, lambda, y, lik, up) - stationary_potential(e, lambda, y, lik, dn)) / 2e-6;
      EXPECT_NEAR(g[m], fd, 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST(Potential, GradientIsTheNoiselessDrift) {
  const Matrix<double> e = gaussian_matrix(3, 5, 9);
  const Vector<double> lambda = vec({1.0, 0.5, 0.25});
  const Vector<double> y = gaussian_matrix(5, 1, 10).col(0);
  const Likelihood<double> lik = Gaussian<double>(0.4);
  const Vector<double> u = gaussian_matrix(3, 1, 11).col(0);
  SdeConfig<double> cfg;
  cfg.n_particles = 1;
  cfg.init = InitKind::Custom;
  cfg.custom_init = u.transpose();
  auto ens = init_ensemble(cfg, testing::bare_basis(lambda));
  StepOptions<double> opts;
  opts.inject_noise = false;
  const double eta = 0.01;
  step(ens, e, lambda, y, lik, eta, opts);
  const Vector<double> moved = ens.coeffs.row(0).transpose() - u;
  EXPECT_TRUE(moved.isApprox(-eta * stationary_potential_gradient(e, lambda, y, lik, u), 1e-12));
}

TEST(Potential, StationaryValueExamples) {
  Matrix<double> e(1, 1);
  e << 1.0;
  // (1 - 0)^2 / 2 + 0 = 0.5 at u = 0
  EXPECT_DOUBLE_EQ(stationary_potential(e, vec({1.0}), vec({1.0}), Likelihood<double>(Gaussian<double>(1.0)),
                                        vec({0.0})),
                   0.5);
  // prior term only
  EXPECT_DOUBLE_EQ(stationary_potential(Matrix<double>(2, 0), vec({2.0, 0.5}), Vector<double>(0),
                                        Likelihood<double>(Gaussian<double>(1.0)), vec({2.0, 1.0})),
                   0.5 * (4.0 / 2.0 + 1.0 / 0.5));
}

class OptimalPotentialTest : public ::testing::Test {
 protected:
  Matrix<double> x = uniform_points(30, 1, 12);
  Vector<double> y = x.col(0).array().sin();
  SpectralBasis<double> basis = fit_nystroem(kSe, Matrix<double>(x.topRows(4)));
};

TEST_F(OptimalPotentialTest, ZeroNoiseHookEqualsVInfinity) {
  const OptimalPotential<double> op(basis, kSe, x, y, Gaussian<double>(0.3));
  const Vector<double> u = Vector<double>::Constant(basis.size(), 0.2);
  const auto est = op.estimate(u, 10, 1, true);
  EXPECT_EQ(est.value, est.v_inf);
  EXPECT_DOUBLE_EQ(est.v_inf, stationary_potential(basis, x, y, Likelihood<double>(Gaussian<double>(0.3)), u));
}

TEST_F(OptimalPotentialTest, GaussianGapIsTraceOverTwiceNoise) {
  // E[(y - mu - s xi)^2] / (2 s2) = (y - mu)^2 / (2 s2) + Sigma_nn / (2 s2), before clamping
  const double s2 = 0.3;
  const OptimalPotential<double> op(basis, kSe, x, y, Gaussian<double>(s2));
  const Vector<double> u = Vector<double>::Zero(basis.size());
  const auto est = op.estimate(u, 200000, 2);
  const Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(op.sigma());
  const Matrix<double> sigma_psd =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
  const double gap = sigma_psd.trace() / (2 * s2);
  EXPECT_NEAR(est.value - est.v_inf, gap, 5 * est.std_error + 1e-9);
  EXPECT_GT(est.std_error, 0.0);
}

TEST_F(OptimalPotentialTest, ReproducibleAndValidated) {
  const OptimalPotential<double> op(basis, kSe, x, y, Gaussian<double>(0.3));
  const Vector<double> u = Vector<double>::Ones(basis.size());
  EXPECT_EQ(op.estimate(u, 1000, 5).value, op.estimate(u, 1000, 5).value);
  EXPECT_THROW(op.estimate(u, 0, 5), InputError);
  EXPECT_THROW(op.estimate(Vector<double>::Ones(basis.size() + 1), 10, 5), InputError);
  EXPECT_THROW(OptimalPotential<double>(basis, kSe, x, Vector<double>(3), Gaussian<double>(0.3)), InputError);
}

TEST(OptimalPotential, ExactWhenSigmaVanishes) {
  const Matrix<double> x = uniform_points(8, 1, 13, -1.0, 1.0);
  const Kernel<double> k = Kernel<double>::isotropic(KernelFamily::Matern32, 1, 0.4, 1.0);
  const auto basis = fit_nystroem(k, x, 0.0);
  const Vector<double> y = (x.col(0).array() > 0).cast<double>();
  const OptimalPotential<double> op(basis, k, x, y, BernoulliLogistic<double>());
  const Vector<double> u = Vector<double>::Constant(basis.size(), 0.1);
  const auto est = op.estimate(u, 500, 6);
  EXPECT_NEAR(est.value, est.v_inf, 1e-4 * std::abs(est.v_inf));
}

PredictiveDraws<double> constant_draws(Index j, const Vector<double>& row) {
  return {row.transpose().replicate(j, 1)};
}

TEST(Metrics, PerfectPointPrediction) {
  const Vector<double> y = vec({0.3, -1.2, 2.0});
  MetricOptions opts;
  opts.interval_with_noise = false;
  const auto rep = metrics(constant_draws(5, y), y, Likelihood<double>(Gaussian<double>(1.0)), opts);
  EXPECT_NEAR(rep.nll, 0.5 * std::log(2 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(rep.mae, 0.0, 1e-15);
  EXPECT_EQ(rep.interval_width_95, 0.0);
  EXPECT_FALSE(rep.interval_includes_noise);
  EXPECT_FALSE(rep.accuracy.has_value());
}

TEST(Metrics, NoiseWidensGaussianInterval) {
  const Vector<double> y = Vector<double>::Zero(2);
  MetricOptions opts;
  const auto rep = metrics(constant_draws(20000, y), y, Likelihood<double>(Gaussian<double>(1.0)), opts);
  EXPECT_TRUE(rep.interval_includes_noise);
  EXPECT_NEAR(rep.interval_width_95, 2 * 1.959964, 0.08);
}

TEST(Metrics, MixtureNllUsesLogSumExp) {
  // draws at -1 and 1, target 0: -log mean N(0; +-1, 1) = 0.5 log 2pi + 0.5
  Matrix<double> f(2, 1);
  f << -1.0, 1.0;
  const auto rep = metrics(PredictiveDraws<double>{f}, vec({0.0}), Likelihood<double>(Gaussian<double>(1.0)));
  EXPECT_NEAR(rep.nll, 0.5 * std::log(2 * std::numbers::pi) + 0.5, 1e-14);
  // far-off target stays finite
  const auto far = metrics(PredictiveDraws<double>{f}, vec({1e5}), Likelihood<double>(Gaussian<double>(1.0)));
  EXPECT_TRUE(std::isfinite(far.nll));
}

TEST(Metrics, ClassificationScores) {
  const Vector<double> y = vec({0, 0, 1, 1});
  const Vector<double> latent = vec({-3, -1, 2, 4});
  const auto rep = metrics(constant_draws(4, latent), y, Likelihood<double>(BernoulliLogistic<double>()));
  ASSERT_TRUE(rep.accuracy && rep.auc);
  EXPECT_DOUBLE_EQ(*rep.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(*rep.auc, 1.0);
  const auto flipped = metrics(constant_draws(4, Vector<double>(-latent)), y,
                               Likelihood<double>(BernoulliLogistic<double>()));
  EXPECT_DOUBLE_EQ(*flipped.auc, 0.0);
  EXPECT_DOUBLE_EQ(*flipped.accuracy, 0.0);
  EXPECT_FALSE(auc_score(vec({0.1, 0.2}), vec({1, 1})).has_value());
  EXPECT_DOUBLE_EQ(*auc_score(vec({0.5, 0.5}), vec({0, 1})), 0.5);
}

TEST(Metrics, InputChecks) {
  const Vector<double> y = vec({0.0, 1.0});
  const Likelihood<double> g = Gaussian<double>(1.0);
  EXPECT_THROW(metrics(constant_draws(1, y), y, g), InputError);
  EXPECT_THROW(metrics(constant_draws(3, y), vec({0.0}), g), InputError);
  EXPECT_THROW(metrics(constant_draws(3, y), vec({0.0, 0.5}), Likelihood<double>(BernoulliLogistic<double>())),
               InputError);
}

TEST(Metrics, QuantileType7) {
  const std::vector<double> s{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 1.75);
}

}  // namespace
}  // namespace pls
