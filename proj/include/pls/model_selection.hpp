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
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "pls/errors.hpp"
#include "pls/kernels.hpp"
#include "pls/linalg.hpp"
#include "pls/parallel.hpp"
#include "pls/random.hpp"
#include "pls/types.hpp"

namespace pls {

/// Per-dimension median of |x_i,d - x_j,d| over all pairs i < j, or over
/// `max_pairs` random pairs when there are more. Zero medians become 1.
template <typename Scalar>
Vector<Scalar> median_heuristic(const Matrix<Scalar>& x, std::uint64_t seed = 0, Index max_pairs = 10000) {
  const Index n = x.rows();
  const Index dim = x.cols();
  if (n < 2) throw InputError("median_heuristic: need at least two points");
  if (dim < 1) throw InputError("median_heuristic: need at least one feature");

  std::vector<std::pair<Index, Index>> pairs;
  const Index all = n * (n - 1) / 2;
  if (all <= max_pairs) {
    pairs.reserve(static_cast<std::size_t>(all));
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    RandomStream<Scalar> rng(seed, StreamDomain::Tuning, 0);
    auto pick = [&](Index span) {
      return std::min<Index>(static_cast<Index>(rng.uniform() * static_cast<Scalar>(span)), span - 1);
    };
    pairs.reserve(static_cast<std::size_t>(max_pairs));
    while (static_cast<Index>(pairs.size()) < max_pairs) {
      const Index i = pick(n);
      Index j = pick(n - 1);
      if (j >= i) ++j;
      pairs.emplace_back(i, j);
    }
  }

  Vector<Scalar> out(dim);
  std::vector<Scalar> gaps(pairs.size());
  for (Index d = 0; d < dim; ++d) {
    for (std::size_t p = 0; p < pairs.size(); ++p) gaps[p] = std::abs(x(pairs[p].first, d) - x(pairs[p].second, d));
    std::sort(gaps.begin(), gaps.end());
    const std::size_t h = gaps.size() / 2;
    Scalar med = gaps.size() % 2 == 1 ? gaps[h] : Scalar(0.5) * (gaps[h - 1] + gaps[h]);
    out[d] = med > 0 ? med : Scalar(1);
  }
  return out;
}

/// Exact GP log marginal likelihood
///   -1/2 y^T (K + s2 I)^-1 y - 1/2 log det(K + s2 I) - N/2 log 2 pi.
template <typename Scalar>
Scalar log_marginal_likelihood(const Kernel<Scalar>& k, const Matrix<Scalar>& x, const Vector<Scalar>& y,
                               Scalar noise_variance) {
  if (x.rows() != y.size()) throw InputError("log_marginal_likelihood: inputs and targets differ in length");
  if (x.rows() < 1) throw InputError("log_marginal_likelihood: no data");
  if (!(noise_variance >= 0)) throw InputError("log_marginal_likelihood: noise variance must be non-negative");
  Matrix<Scalar> cov = gram(k, x, x);
  cov.diagonal().array() += noise_variance;
  const auto factor = cholesky_with_jitter(cov, Scalar(1e-10), Scalar(1e-4), true);
  const auto lower = factor.lower.template triangularView<Eigen::Lower>();
  const Vector<Scalar> alpha = lower.solve(y);
  const Scalar log_det = Scalar(2) * factor.lower.diagonal().array().log().sum();
  const Scalar n = static_cast<Scalar>(y.size());
  return Scalar(-0.5) * alpha.squaredNorm() - Scalar(0.5) * log_det -
         Scalar(0.5) * n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Candidate hyperparameters; every combination is evaluated.
template <typename Scalar = double>
struct HyperparamGrid {
  std::vector<Vector<Scalar>> lengthscales;
  std::vector<Scalar> signal_variances;
  std::vector<Scalar> noise_variances;

  std::size_t size() const { return lengthscales.size() * signal_variances.size() * noise_variances.size(); }

  /// Log-spaced multiples of the median heuristic and of var(y).
  static HyperparamGrid around(const Matrix<Scalar>& x, const Vector<Scalar>& y, std::uint64_t seed = 0) {
    HyperparamGrid g;
    const Vector<Scalar> base = median_heuristic(x, seed);
    for (Scalar f : {Scalar(0.25), Scalar(0.5), Scalar(1), Scalar(2), Scalar(4)}) g.lengthscales.push_back(base * f);
    Scalar var = y.size() > 1 ? (y.array() - y.mean()).square().sum() / static_cast<Scalar>(y.size() - 1) : Scalar(1);
    if (!(var > 0)) var = Scalar(1);
    for (Scalar f : {Scalar(0.5), Scalar(1), Scalar(2)}) g.signal_variances.push_back(var * f);
    for (Scalar f : {Scalar(0.01), Scalar(0.1), Scalar(0.5)}) g.noise_variances.push_back(var * f);
    return g;
  }
};

template <typename Scalar = double>
struct HyperparamSearchConfig {
  KernelFamily family = KernelFamily::SquaredExponential;
  Index subset_size = 2000;
  Index n_repeats = 10;
  HyperparamGrid<Scalar> grid;
  std::uint64_t seed = 0;

  static HyperparamSearchConfig regression() { return {}; }
  static HyperparamSearchConfig classification() {
    HyperparamSearchConfig c;
    c.subset_size = 1000;
    c.n_repeats = 5;
    return c;
  }
};

template <typename Scalar = double>
struct HyperparamChoice {
  Vector<Scalar> lengthscales;
  Scalar signal_variance = 1;
  Scalar noise_variance = 1;
  Scalar log_marginal_likelihood = 0;
};

template <typename Scalar = double>
struct HyperparamFit {
  Kernel<Scalar> kernel;
  Scalar noise_variance;
  std::vector<HyperparamChoice<Scalar>> per_repeat;
};

namespace detail {

template <typename Scalar>
HyperparamChoice<Scalar> grid_search(KernelFamily family, const HyperparamGrid<Scalar>& grid,
                                     const Matrix<Scalar>& x, const Vector<Scalar>& y) {
  HyperparamChoice<Scalar> best;
  best.log_marginal_likelihood = -std::numeric_limits<Scalar>::infinity();
  bool found = false;
  for (const auto& ls : grid.lengthscales) {
    for (Scalar sv : grid.signal_variances) {
      const Kernel<Scalar> k(family, ls, sv);
      for (Scalar nv : grid.noise_variances) {
        Scalar lml;
        try {
          lml = log_marginal_likelihood(k, x, y, nv);
        } catch (const NumericalError&) {
          continue;
        }
        if (!found || lml > best.log_marginal_likelihood) {
          best = {ls, sv, nv, lml};
          found = true;
        }
      }
    }
  }
  if (!found) throw NumericalError("fit_hyperparams: every grid candidate failed to factorize");
  return best;
}

template <typename Scalar>
std::vector<Index> nearest_rows(const Matrix<Scalar>& x, Index centre, Index count) {
  const Index n = x.rows();
  const Vector<Scalar> d2 = (x.rowwise() - x.row(centre)).rowwise().squaredNorm();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return d2[a] < d2[b]; });
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// Grid search of the GP marginal likelihood on nearest-neighbour subsets
/// around random centroids; selections are averaged geometrically.
template <typename Scalar>
HyperparamFit<Scalar> fit_hyperparams(const Matrix<Scalar>& x, const Vector<Scalar>& y,
                                      const HyperparamSearchConfig<Scalar>& cfg) {
  if (x.rows() != y.size()) throw InputError("fit_hyperparams: inputs and targets differ in length");
  if (x.rows() < 1) throw InputError("fit_hyperparams: no data");
  if (cfg.subset_size < 2) throw InputError("fit_hyperparams: subset size must be at least 2");
  if (cfg.n_repeats < 1) throw InputError("fit_hyperparams: need at least one repeat");
  if (cfg.grid.size() == 0) throw InputError("fit_hyperparams: hyperparameter grid is empty");
  for (const auto& ls : cfg.grid.lengthscales)
    if (ls.size() != x.cols()) throw InputError("fit_hyperparams: grid lengthscale dimension does not match data");

  const Index n = x.rows();
  const bool full = n <= cfg.subset_size;
  const Index repeats = full ? 1 : cfg.n_repeats;
  std::vector<HyperparamChoice<Scalar>> picks(static_cast<std::size_t>(repeats));

  parallel_blocks(repeats, 1, [&](Index begin, Index end) {
    for (Index r = begin; r < end; ++r) {
      if (full) {
        picks[static_cast<std::size_t>(r)] = detail::grid_search(cfg.family, cfg.grid, x, y);
        continue;
      }
      RandomStream<Scalar> rng(cfg.seed, StreamDomain::Tuning, static_cast<std::uint64_t>(r + 1));
      const Index centre = std::min<Index>(static_cast<Index>(rng.uniform() * static_cast<Scalar>(n)), n - 1);
      const auto rows = detail::nearest_rows(x, centre, cfg.subset_size);
      Matrix<Scalar> xs(cfg.subset_size, x.cols());
      Vector<Scalar> ys(cfg.subset_size);
      for (Index i = 0; i < cfg.subset_size; ++i) {
        xs.row(i) = x.row(rows[static_cast<std::size_t>(i)]);
        ys[i] = y[rows[static_cast<std::size_t>(i)]];
      }
      picks[static_cast<std::size_t>(r)] = detail::grid_search(cfg.family, cfg.grid, xs, ys);
    }
  });

  Vector<Scalar> log_ls = Vector<Scalar>::Zero(x.cols());
  Scalar log_sv = 0, log_nv = 0;
  for (const auto& p : picks) {
    log_ls += p.lengthscales.array().log().matrix();
    log_sv += std::log(p.signal_variance);
    log_nv += std::log(p.noise_variance);
  }
  const Scalar inv = Scalar(1) / static_cast<Scalar>(repeats);
  return {Kernel<Scalar>(cfg.family, (log_ls * inv).array().exp().matrix(), std::exp(log_sv * inv)),
          std::exp(log_nv * inv), std::move(picks)};
}

}  // namespace pls
