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

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pls/errors.hpp"
#include "pls/kernels.hpp"
#include "pls/random.hpp"
#include "pls/types.hpp"

namespace pls {

/// Estimated leading eigenpairs of the covariance operator.
///
/// e_m(x) = weights.col(m)^T k(Z, x), with weights.col(m) = v_m / sqrt(M lambda_m)
/// where (lambda_m, v_m) are eigenpairs of (1/M) k(Z, Z). Eigenvalues are
/// strictly positive and sorted in non-increasing order.
template <typename Scalar = double>
struct SpectralBasis {
  Kernel<Scalar> kernel;
  Matrix<Scalar> inducing;     // M x D
  Vector<Scalar> eigenvalues;  // M'
  Matrix<Scalar> weights;      // M x M'
  Index duplicates_removed = 0;

  Index size() const { return eigenvalues.size(); }
  Index num_inducing() const { return inducing.rows(); }
  Index dim() const { return inducing.cols(); }
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> unique_rows(const Matrix<Scalar>& z, Index& removed) {
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(z.rows()));
  for (Index i = 0; i < z.rows(); ++i) {
    bool dup = false;
    for (Index j : keep) {
      if (z.row(i) == z.row(j)) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  removed = z.rows() - static_cast<Index>(keep.size());
  if (removed == 0) return z;
  Matrix<Scalar> out(static_cast<Index>(keep.size()), z.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = z.row(keep[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

/// Nystroem estimate of the leading eigenpairs from the inducing points Z.
/// Exact duplicate rows of Z are removed first (counted in
/// `duplicates_removed`). Pairs with lambda < rank_floor * lambda_1 are dropped.
template <typename Scalar>
SpectralBasis<Scalar> fit_nystroem(const Kernel<Scalar>& k, const Matrix<Scalar>& z,
                                   Scalar rank_floor = Scalar(1e-10)) {
  if (z.rows() < 1) throw InputError("fit_nystroem: need at least one inducing point");
  if (z.cols() != k.dim()) throw InputError("fit_nystroem: inducing point dimension does not match kernel");
  if (!z.allFinite()) throw InputError("fit_nystroem: inducing points must be finite");
  if (!(rank_floor >= 0 && rank_floor < 1)) throw InputError("fit_nystroem: rank_floor must lie in [0, 1)");

  Index removed = 0;
  Matrix<Scalar> zu = detail::unique_rows(z, removed);
  const Index m = zu.rows();
  const Matrix<Scalar> scaled = gram(k, zu, zu) / static_cast<Scalar>(m);

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(scaled);
  if (eig.info() != Eigen::Success) throw NumericalError("fit_nystroem: eigendecomposition failed");

  // Eigen sorts ascending; walk from the top.
  const Vector<Scalar>& evals = eig.eigenvalues();
  const Scalar top = evals[m - 1];
  if (!(top > 0)) throw DegenerateKernelError("fit_nystroem: kernel matrix has no positive eigenvalue");
  const Scalar cutoff = rank_floor * top;
  Index kept = 0;
  while (kept < m && evals[m - 1 - kept] > 0 && evals[m - 1 - kept] >= cutoff) ++kept;
  if (kept == 0) throw DegenerateKernelError("fit_nystroem: all eigenvalues fell below the rank floor");

  SpectralBasis<Scalar> basis{k, std::move(zu), Vector<Scalar>(kept), Matrix<Scalar>(m, kept), removed};
  for (Index c = 0; c < kept; ++c) {
    const Index src = m - 1 - c;
    Vector<Scalar> v = eig.eigenvectors().col(src);
    // canonical sign: first clearly nonzero coordinate positive
    const Scalar tol = std::sqrt(std::numeric_limits<Scalar>::epsilon()) * v.cwiseAbs().maxCoeff();
    for (Index i = 0; i < m; ++i) {
      if (std::abs(v[i]) > tol) {
        if (v[i] < 0) v = -v;
        break;
      }
    }
    basis.eigenvalues[c] = evals[src];
    basis.weights.col(c) = v / std::sqrt(static_cast<Scalar>(m) * evals[src]);
  }
  return basis;
}

/// Estimated eigenfunctions at the rows of X: an M' x N matrix with entry
/// (m, n) = e_m(x_n).
template <typename Scalar>
Matrix<Scalar> eval_basis(const SpectralBasis<Scalar>& basis, const Matrix<Scalar>& x) {
  if (x.cols() != basis.dim())
    throw InputError("eval_basis: input dimension " + std::to_string(x.cols()) + " does not match basis dimension " +
                     std::to_string(basis.dim()));
  if (x.rows() == 0) return Matrix<Scalar>(basis.size(), 0);
  return basis.weights.transpose() * gram(basis.kernel, basis.inducing, x);
}

/// Greedy residual-variance (pivoted Cholesky) selection of M rows of X.
/// Returns the selected row indices in pick order. Exact ties go to the
/// lowest index; residuals below 1e-10 of the largest prior variance count
/// as exhausted.
template <typename Scalar>
std::vector<Index> greedy_inducing_indices(const Kernel<Scalar>& k, const Matrix<Scalar>& x, Index m) {
  const Index n = x.rows();
  if (m < 1 || m > n)
    throw InputError("select_inducing_greedy: need 1 <= M <= N (M=" + std::to_string(m) +
                     ", N=" + std::to_string(n) + ")");
  if (x.cols() != k.dim()) throw InputError("select_inducing_greedy: input dimension does not match kernel");

  Vector<Scalar> residual(n);
  for (Index i = 0; i < n; ++i) residual[i] = k(x.row(i), x.row(i));
  const Scalar exhausted = Scalar(1e-10) * residual.maxCoeff();
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Matrix<Scalar> factor = Matrix<Scalar>::Zero(n, m);
  std::vector<Index> picks;
  picks.reserve(static_cast<std::size_t>(m));

  for (Index t = 0; t < m; ++t) {
    Index best = -1;
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || residual[i] > residual[best]) best = i;
    }
    picks.push_back(best);
    taken[static_cast<std::size_t>(best)] = true;
    const Scalar pivot = residual[best];
    if (pivot > 0) {
      const Scalar inv = Scalar(1) / std::sqrt(pivot);
      const RowVector<Scalar> prev = factor.row(best).head(t);
      for (Index i = 0; i < n; ++i) {
        const Scalar cov = k(x.row(i), x.row(best)) - factor.row(i).head(t).dot(prev);
        factor(i, t) = cov * inv;
      }
      residual -= factor.col(t).cwiseAbs2();
    }
    for (Index i = 0; i < n; ++i)
      if (residual[i] <= exhausted) residual[i] = 0;
  }
  return picks;
}

/// Greedy variance selection of M inducing points. The seed is part of the
/// interface for reproducibility records; ties are broken by lowest index.
template <typename Scalar>
Matrix<Scalar> select_inducing_greedy(const Kernel<Scalar>& k, const Matrix<Scalar>& x, Index m,
                                      std::uint64_t /*seed*/ = 0) {
  const auto picks = greedy_inducing_indices(k, x, m);
  Matrix<Scalar> z(m, x.cols());
  for (Index i = 0; i < m; ++i) z.row(i) = x.row(picks[static_cast<std::size_t>(i)]);
  return z;
}

/// Uniform random subset of M rows (without replacement), in row order.
template <typename Scalar>
Matrix<Scalar> select_inducing_random(const Matrix<Scalar>& x, Index m, std::uint64_t seed) {
  if (m < 1 || m > x.rows()) throw InputError("select_inducing_random: need 1 <= M <= N");
  return AnchorSet<Scalar>::from_training(x, m, seed).points();
}

}  // namespace pls
