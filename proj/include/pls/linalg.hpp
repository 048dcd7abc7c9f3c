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
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pls/errors.hpp"
#include "pls/types.hpp"

namespace pls {

template <typename Scalar>
struct JitteredCholesky {
  Matrix<Scalar> lower;  // L with L L^T = A + jitter I
  Scalar jitter = 0;
};

/// Cholesky factorization with adaptive diagonal jitter: starts at
/// `start_rel * scale` and grows by 10x up to `max_rel * scale`, where
/// scale = trace(A) / n. With `try_exact`, an unjittered attempt comes first.
template <typename Scalar>
JitteredCholesky<Scalar> cholesky_with_jitter(const Matrix<Scalar>& a, Scalar start_rel = Scalar(1e-10),
                                              Scalar max_rel = Scalar(1e-4), bool try_exact = false) {
  const Index n = a.rows();
  if (n == 0 || a.cols() != n) throw InputError("cholesky_with_jitter: matrix must be square and non-empty");
  if (!a.allFinite()) throw NumericalError("cholesky_with_jitter: matrix has non-finite entries");
  Scalar scale = a.trace() / static_cast<Scalar>(n);
  if (!(scale > 0)) scale = Scalar(1);

  Eigen::LLT<Matrix<Scalar>> llt;
  if (try_exact) {
    llt.compute(a);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), Scalar(0)};
  }

  for (Scalar jitter = start_rel * scale; jitter <= max_rel * scale * Scalar(1.0000001); jitter *= 10) {
    Matrix<Scalar> shifted = a;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw NumericalError("Cholesky factorization failed after jitter up to " +
                       std::to_string(static_cast<double>(max_rel * scale)));
}

/// Symmetric square root via eigendecomposition, with negative eigenvalues
/// clamped to zero. Returns S with S S^T = A_+.
template <typename Scalar>
Matrix<Scalar> psd_sqrt(const Matrix<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");
  const Vector<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace pls
