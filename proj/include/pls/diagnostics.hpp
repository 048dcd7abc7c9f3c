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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "pls/errors.hpp"
#include "pls/kernels.hpp"
#include "pls/likelihoods.hpp"
#include "pls/linalg.hpp"
#include "pls/parallel.hpp"
#include "pls/predictor.hpp"
#include "pls/random.hpp"
#include "pls/spectral.hpp"
#include "pls/types.hpp"

namespace pls {

/// Closed-form stationary coefficient law under a Gaussian likelihood.
template <typename Scalar = double>
struct GaussianCoeffPosterior {
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;
};

/// Sigma* = (diag(lambda)^-1 + E E^T / s2)^-1, mu* = Sigma* E y / s2, for
/// features E (M' x N).
template <typename Scalar>
GaussianCoeffPosterior<Scalar> gaussian_oracle(const Matrix<Scalar>& e, const Vector<Scalar>& lambda,
                                               const Vector<Scalar>& y, Scalar noise_variance) {
  if (!(noise_variance > 0)) throw InputError("gaussian_oracle: noise variance must be positive");
  if (e.rows() != lambda.size() || e.cols() != y.size()) throw InputError("gaussian_oracle: shape mismatch");
  if (lambda.size() > 0 && !(lambda.minCoeff() > 0)) throw InputError("gaussian_oracle: eigenvalues must be positive");
  Matrix<Scalar> precision = lambda.cwiseInverse().asDiagonal();
  precision.noalias() += e * e.transpose() / noise_variance;
  Eigen::LLT<Matrix<Scalar>> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("gaussian_oracle: precision matrix is not positive definite");
  GaussianCoeffPosterior<Scalar> post;
  post.covariance = llt.solve(Matrix<Scalar>::Identity(lambda.size(), lambda.size()));
  post.covariance = Scalar(0.5) * (post.covariance + post.covariance.transpose()).eval();
  post.mean = llt.solve(e * y / noise_variance);
  return post;
}

template <typename Scalar>
GaussianCoeffPosterior<Scalar> gaussian_oracle(const SpectralBasis<Scalar>& basis, const Matrix<Scalar>& x,
                                               const Vector<Scalar>& y, Scalar noise_variance) {
  return gaussian_oracle(eval_basis(basis, x), basis.eigenvalues, y, noise_variance);
}

template <typename Scalar = double>
struct BoundReport {
  Scalar kappa = 1;
  Scalar trace_sigma = 0;
  Scalar bound = 0;
  Vector<Scalar> per_point_diag;  // clamped
  Index clamped_entries = 0;
};

/// Sigma(X) = r(X, X) - e(X)^T Lambda e(X), with r taken under `anchors`.
template <typename Scalar>
Matrix<Scalar> sigma_matrix(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k, const Matrix<Scalar>& x,
                            const AnchorSet<Scalar>& anchors) {
  const Matrix<Scalar> e = eval_basis(basis, x);
  Matrix<Scalar> s = r_gram(k, x, x, anchors);
  s.noalias() -= e.transpose() * basis.eigenvalues.asDiagonal() * e;
  return Scalar(0.5) * (s + s.transpose());
}

template <typename Scalar>
BoundReport<Scalar> kl_bound(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k, const Matrix<Scalar>& x,
                             Scalar kappa, const AnchorSet<Scalar>& anchors) {
  if (!(kappa > 0) || !std::isfinite(kappa)) throw InputError("kl_bound: kappa must be positive and finite");
  if (x.rows() < 1) throw InputError("kl_bound: need at least one data point");
  const Matrix<Scalar> e = eval_basis(basis, x);
  BoundReport<Scalar> rep;
  rep.kappa = kappa;
  rep.per_point_diag = r_diagonal(k, x, anchors);
  rep.per_point_diag.noalias() -= e.cwiseAbs2().transpose() * basis.eigenvalues;
  for (Index n = 0; n < rep.per_point_diag.size(); ++n) {
    if (rep.per_point_diag[n] < 0) {
      rep.per_point_diag[n] = 0;
      ++rep.clamped_entries;
    }
  }
  rep.trace_sigma = rep.per_point_diag.sum();
  rep.bound = kappa * kappa / Scalar(2) * rep.trace_sigma;
  return rep;
}

/// KL bound with r under the empirical measure of the training inputs.
template <typename Scalar>
BoundReport<Scalar> kl_bound(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k, const Matrix<Scalar>& x,
                             Scalar kappa) {
  return kl_bound(basis, k, x, kappa, AnchorSet<Scalar>::from_training(x));
}

/// Exact Lipschitz constant sqrt(N) * sup |d cost| for the logistic loss.
template <typename Scalar>
Scalar bernoulli_kappa(Index n) {
  return std::sqrt(static_cast<Scalar>(n));
}

template <typename Scalar = double>
struct TailDecayFit {
  Scalar exp_slope = 0;  // log lambda_m ~ a + b m
  Scalar exp_r2 = 0;
  Scalar poly_slope = 0;  // log lambda_m ~ a + b log m
  Scalar poly_r2 = 0;
};

namespace detail {

template <typename Scalar>
void least_squares_line(const Vector<Scalar>& t, const Vector<Scalar>& v, Scalar& slope, Scalar& r2) {
  const Scalar tm = t.mean();
  const Scalar vm = v.mean();
  const Vector<Scalar> tc = t.array() - tm;
  const Vector<Scalar> vc = v.array() - vm;
  slope = tc.dot(vc) / tc.squaredNorm();
  const Scalar ss_res = (vc - slope * tc).squaredNorm();
  const Scalar ss_tot = vc.squaredNorm();
  r2 = ss_tot > 0 ? Scalar(1) - ss_res / ss_tot : Scalar(1);
}

}  // namespace detail

template <typename Scalar>
TailDecayFit<Scalar> tail_decay_fit(const Vector<Scalar>& eigenvalues) {
  const Index m = eigenvalues.size();
  if (m < 10)
    throw InputError("tail_decay_fit: need at least 10 retained eigenvalues, got " + std::to_string(m));
  if (!(eigenvalues.minCoeff() > 0)) throw InputError("tail_decay_fit: eigenvalues must be positive");
  const Vector<Scalar> idx = Vector<Scalar>::LinSpaced(m, Scalar(1), static_cast<Scalar>(m));
  const Vector<Scalar> logv = eigenvalues.array().log();
  TailDecayFit<Scalar> fit;
  detail::least_squares_line<Scalar>(idx, logv, fit.exp_slope, fit.exp_r2);
  detail::least_squares_line<Scalar>(idx.array().log(), logv, fit.poly_slope, fit.poly_r2);
  return fit;
}

template <typename Scalar>
TailDecayFit<Scalar> tail_decay_fit(const SpectralBasis<Scalar>& basis) {
  return tail_decay_fit(basis.eigenvalues);
}

/// V(u) = l_N(E^T u) + 1/2 u^T diag(lambda)^-1 u.
template <typename Scalar>
Scalar stationary_potential(const Matrix<Scalar>& e, const Vector<Scalar>& lambda, const Vector<Scalar>& y,
                            const Likelihood<Scalar>& lik, const Vector<Scalar>& u) {
  if (u.size() != lambda.size() || e.rows() != lambda.size() || e.cols() != y.size())
    throw InputError("stationary_potential: shape mismatch");
  const Scalar prior = Scalar(0.5) * u.cwiseAbs2().dot(lambda.cwiseInverse());
  if (y.size() == 0) return prior;
  return total_cost(lik, y, Vector<Scalar>(e.transpose() * u)) + prior;
}

template <typename Scalar>
Scalar stationary_potential(const SpectralBasis<Scalar>& basis, const Matrix<Scalar>& x, const Vector<Scalar>& y,
                            const Likelihood<Scalar>& lik, const Vector<Scalar>& u) {
  return stationary_potential(eval_basis(basis, x), basis.eigenvalues, y, lik, u);
}

/// Gradient E dcost(y, E^T u) + diag(lambda)^-1 u.
template <typename Scalar>
Vector<Scalar> stationary_potential_gradient(const Matrix<Scalar>& e, const Vector<Scalar>& lambda,
                                             const Vector<Scalar>& y, const Likelihood<Scalar>& lik,
                                             const Vector<Scalar>& u) {
  if (u.size() != lambda.size() || e.rows() != lambda.size() || e.cols() != y.size())
    throw InputError("stationary_potential_gradient: shape mismatch");
  Vector<Scalar> g = u.cwiseQuotient(lambda);
  if (y.size() > 0) g.noalias() += e * batch_dcost(lik, y, Vector<Scalar>(e.transpose() * u));
  return g;
}

template <typename Scalar = double>
struct PotentialEstimate {
  Scalar value = 0;      // V*(u)
  Scalar std_error = 0;  // of the Monte Carlo average
  Scalar v_inf = 0;      // V(u) at xi = 0
};

/// Monte Carlo estimator of
///   V*(u) = E_xi[ l_N(E^T u + sqrt(Sigma(X)) xi) ] + 1/2 u^T diag(lambda)^-1 u.
/// The square root is symmetric with negative eigenvalues clamped.
template <typename Scalar = double>
class OptimalPotential {
 public:
  OptimalPotential(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k, const Matrix<Scalar>& x,
                   Vector<Scalar> y, Likelihood<Scalar> lik, const AnchorSet<Scalar>& anchors)
      : e_(eval_basis(basis, x)),
        lambda_(basis.eigenvalues),
        y_(std::move(y)),
        lik_(std::move(lik)),
        sigma_(sigma_matrix(basis, k, x, anchors)) {
    if (y_.size() != x.rows()) throw InputError("optimal potential: inputs and observations differ in length");
    check_observations(lik_, y_);
    root_ = psd_sqrt(sigma_);
  }

  OptimalPotential(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k, const Matrix<Scalar>& x,
                   Vector<Scalar> y, Likelihood<Scalar> lik)
      : OptimalPotential(basis, k, x, std::move(y), std::move(lik), AnchorSet<Scalar>::from_training(x)) {}

  const Matrix<Scalar>& sigma() const { return sigma_; }
  Scalar trace_sigma() const { return sigma_.diagonal().cwiseMax(Scalar(0)).sum(); }

  /// Draw i uses stream (seed, Potential, i). With `zero_noise` every xi is 0.
  PotentialEstimate<Scalar> estimate(const Vector<Scalar>& u, Index n_mc, std::uint64_t seed,
                                     bool zero_noise = false) const {
    if (n_mc < 1) throw InputError("optimal potential: n_mc must be at least 1");
    if (u.size() != lambda_.size()) throw InputError("optimal potential: u has the wrong dimension");
    const Index n = y_.size();
    const Vector<Scalar> mu = e_.transpose() * u;
    const Scalar prior = Scalar(0.5) * u.cwiseAbs2().dot(lambda_.cwiseInverse());

    PotentialEstimate<Scalar> est;
    est.v_inf = (n > 0 ? total_cost(lik_, y_, mu) : Scalar(0)) + prior;
    if (n == 0 || zero_noise) {
      est.value = est.v_inf;
      return est;
    }

    constexpr Index kBlock = 256;
    const Index n_blocks = (n_mc + kBlock - 1) / kBlock;
    Vector<Scalar> block_sum = Vector<Scalar>::Zero(n_blocks), block_sq = Vector<Scalar>::Zero(n_blocks);
    parallel_blocks(n_mc, kBlock, [&](Index begin, Index end) {
      const Index b = end - begin;
      Matrix<Scalar> xi(n, b);
      for (Index i = 0; i < b; ++i) {
        RandomStream<Scalar> rng(seed, StreamDomain::Potential, static_cast<std::uint64_t>(begin + i));
        for (Index r = 0; r < n; ++r) xi(r, i) = rng.normal();
      }
      Matrix<Scalar> f = root_ * xi;
      f.colwise() += mu;
      Scalar s = 0, s2 = 0;
      for (Index i = 0; i < b; ++i) {
        Scalar l = 0;
        for (Index r = 0; r < n; ++r) l += cost(lik_, y_[r], f(r, i));
        if (!std::isfinite(l))
          throw NumericalError("optimal potential: non-finite data cost at draw " + std::to_string(begin + i));
        s += l;
        s2 += l * l;
      }
      block_sum[begin / kBlock] = s;
      block_sq[begin / kBlock] = s2;
    });
    const Scalar count = static_cast<Scalar>(n_mc);
    const Scalar mean = block_sum.sum() / count;
    est.value = mean + prior;
    if (n_mc > 1) {
      const Scalar var = std::max(Scalar(0), (block_sq.sum() - count * mean * mean) / (count - 1));
      est.std_error = std::sqrt(var / count);
    }
    return est;
  }

 private:
  Matrix<Scalar> e_;
  Vector<Scalar> lambda_;
  Vector<Scalar> y_;
  Likelihood<Scalar> lik_;
  Matrix<Scalar> sigma_;
  Matrix<Scalar> root_;
};

template <typename Scalar>
PotentialEstimate<Scalar> optimal_potential_mc(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k,
                                               const Matrix<Scalar>& x, const Vector<Scalar>& y,
                                               const Likelihood<Scalar>& lik, const Vector<Scalar>& u, Index n_mc,
                                               std::uint64_t seed) {
  return OptimalPotential<Scalar>(basis, k, x, y, lik).estimate(u, n_mc, seed);
}

template <typename Scalar = double>
struct MetricReport {
  Scalar nll = 0;
  Scalar mae = 0;
  Scalar interval_width_95 = 0;
  std::optional<Scalar> accuracy;
  std::optional<Scalar> auc;
  bool interval_includes_noise = false;
};

struct MetricOptions {
  std::uint64_t seed = 0;
  bool interval_with_noise = true;  // Gaussian and Student-t only
};

/// Empirical quantile with linear interpolation between order statistics.
template <typename Scalar>
Scalar quantile_sorted(const std::vector<Scalar>& sorted, Scalar p) {
  const Scalar h = p * static_cast<Scalar>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<Scalar>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Rank-statistic AUC with average ranks for ties; empty when one class is absent.
template <typename Scalar>
std::optional<Scalar> auc_score(const Vector<Scalar>& scores, const Vector<Scalar>& labels) {
  const Index n = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return scores[a] < scores[b]; });
  Scalar rank_sum = 0;
  Index n_pos = 0;
  for (Index i = 0; i < n;) {
    Index j = i;
    while (j + 1 < n && scores[order[static_cast<std::size_t>(j + 1)]] == scores[order[static_cast<std::size_t>(i)]])
      ++j;
    const Scalar avg_rank = static_cast<Scalar>(i + j + 2) / Scalar(2);
    for (Index t = i; t <= j; ++t) {
      if (labels[order[static_cast<std::size_t>(t)]] > Scalar(0.5)) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const Scalar np = static_cast<Scalar>(n_pos);
  return (rank_sum - np * (np + 1) / Scalar(2)) / (np * static_cast<Scalar>(n_neg));
}

template <typename Scalar>
MetricReport<Scalar> metrics(const PredictiveDraws<Scalar>& draws, const Vector<Scalar>& y_test,
                             const Likelihood<Scalar>& lik, const MetricOptions& opts = {}) {
  const Matrix<Scalar>& f = draws.values;
  const Index j_count = f.rows();
  const Index n = f.cols();
  if (y_test.size() != n)
    throw InputError("metrics: " + std::to_string(n) + " predicted points but " + std::to_string(y_test.size()) +
                     " test targets");
  if (n < 1) throw InputError("metrics: no test points");
  if (j_count < 2) throw InputError("metrics: need at least two predictive draws");
  check_observations(lik, y_test);

  const bool is_bernoulli = std::holds_alternative<BernoulliLogistic<Scalar>>(lik);
  const bool add_noise = opts.interval_with_noise && (std::holds_alternative<Gaussian<Scalar>>(lik) ||
                                                      std::holds_alternative<StudentT<Scalar>>(lik));
  MetricReport<Scalar> rep;
  rep.interval_includes_noise = add_noise;
  Vector<Scalar> mean_pred(n);
  std::vector<Scalar> column(static_cast<std::size_t>(j_count));
  Scalar nll = 0, mae = 0, width = 0;

  for (Index i = 0; i < n; ++i) {
    Scalar max_log = -std::numeric_limits<Scalar>::infinity();
    Vector<Scalar> logs(j_count);
    Scalar mp = 0;
    for (Index j = 0; j < j_count; ++j) {
      logs[j] = log_density(lik, y_test[i], f(j, i));
      max_log = std::max(max_log, logs[j]);
      mp += observation_mean(lik, f(j, i));
    }
    mp /= static_cast<Scalar>(j_count);
    mean_pred[i] = mp;
    Scalar lse = max_log;
    if (std::isfinite(max_log)) lse += std::log((logs.array() - max_log).exp().sum());
    nll -= lse - std::log(static_cast<Scalar>(j_count));
    mae += std::abs(y_test[i] - mp);

    RandomStream<Scalar> rng(opts.seed, StreamDomain::Metrics, static_cast<std::uint64_t>(i));
    for (Index j = 0; j < j_count; ++j)
      column[static_cast<std::size_t>(j)] = add_noise ? sample_observation(lik, f(j, i), rng) : f(j, i);
    std::sort(column.begin(), column.end());
    width += quantile_sorted(column, Scalar(0.975)) - quantile_sorted(column, Scalar(0.025));
  }
  const Scalar count = static_cast<Scalar>(n);
  rep.nll = nll / count;
  rep.mae = mae / count;
  rep.interval_width_95 = width / count;

  if (is_bernoulli) {
    Index correct = 0;
    for (Index i = 0; i < n; ++i)
      if ((mean_pred[i] >= Scalar(0.5)) == (y_test[i] > Scalar(0.5))) ++correct;
    rep.accuracy = static_cast<Scalar>(correct) / count;
    rep.auc = auc_score(mean_pred, y_test);
  }
  return rep;
}

}  // namespace pls
