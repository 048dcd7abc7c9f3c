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
#include <string>
#include <string_view>

#include <Eigen/Eigenvalues>

#include "pls/errors.hpp"
#include "pls/kernels.hpp"
#include "pls/linalg.hpp"
#include "pls/parallel.hpp"
#include "pls/random.hpp"
#include "pls/sampler.hpp"
#include "pls/spectral.hpp"
#include "pls/types.hpp"

namespace pls {

/// Handling of an indefinite joint covariance. With the anchors (X*, Z) the
/// Schur complement r(X*, X*) - E*^T Lambda E* can be indefinite when N* is
/// large relative to M. ProjectSchur replaces it by its PSD part, which keeps
/// the conditional mean gain E*^T unchanged.
enum class JointRepair { None, ProjectSchur };

inline std::string_view joint_variant_name(bool repaired) {
  return repaired ? "augmented_anchors_schur_projected" : "augmented_anchors";
}

/// Joint prior covariance of (G(X*), <G, e>):
///   [[ r(X*, X*),  E*^T Lambda ],
///    [ Lambda E*,  Lambda      ]]
/// where r(X*, X*) uses the anchors (X*, Z).
template <typename Scalar = double>
struct JointPriorCov {
  Matrix<Scalar> R;
  Matrix<Scalar> chol;  // lower; chol chol^T = R + jitter I
  Scalar jitter = 0;
  Index n_test = 0;
  Matrix<Scalar> basis_at_test;  // M' x N*
  bool repaired = false;
  Scalar schur_min_eigenvalue = 0;  // before repair; only computed on repair

  Index basis_size() const { return R.rows() - n_test; }
};

template <typename Scalar = double>
struct PredictiveDraws {
  Matrix<Scalar> values;  // J x N*
};

template <typename Scalar>
JointPriorCov<Scalar> build_joint(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k,
                                  const Matrix<Scalar>& xstar, JointRepair repair = JointRepair::None) {
  if (xstar.rows() < 1) throw InputError("build_joint: need at least one test point");
  if (xstar.cols() != basis.dim())
    throw InputError("build_joint: test inputs have " + std::to_string(xstar.cols()) + " columns, basis expects " +
                     std::to_string(basis.dim()));
  if (!xstar.allFinite()) throw InputError("build_joint: test inputs must be finite");

  const Index ns = xstar.rows();
  const Index mp = basis.size();
  Matrix<Scalar> anchors(ns + basis.num_inducing(), xstar.cols());
  anchors << xstar, basis.inducing;

  JointPriorCov<Scalar> joint;
  joint.n_test = ns;
  joint.basis_at_test = eval_basis(basis, xstar);
  joint.R.resize(ns + mp, ns + mp);
  joint.R.topLeftCorner(ns, ns) = r_gram(k, xstar, xstar, AnchorSet<Scalar>(std::move(anchors)));
  joint.R.topRightCorner(ns, mp) = joint.basis_at_test.transpose() * basis.eigenvalues.asDiagonal();
  joint.R.bottomLeftCorner(mp, ns) = joint.R.topRightCorner(ns, mp).transpose();
  joint.R.bottomRightCorner(mp, mp) = basis.eigenvalues.asDiagonal();

  try {
    auto factor = cholesky_with_jitter(joint.R);
    joint.chol = std::move(factor.lower);
    joint.jitter = factor.jitter;
    return joint;
  } catch (const NumericalError&) {
    if (repair == JointRepair::None) throw;
  }

  const Matrix<Scalar> explained =
      joint.basis_at_test.transpose() * basis.eigenvalues.asDiagonal() * joint.basis_at_test;
  Matrix<Scalar> schur = joint.R.topLeftCorner(ns, ns) - explained;
  schur = Scalar(0.5) * (schur + schur.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(schur);
  if (eig.info() != Eigen::Success) throw NumericalError("build_joint: eigendecomposition failed");
  joint.schur_min_eigenvalue = eig.eigenvalues().minCoeff();
  joint.R.topLeftCorner(ns, ns) = explained + eig.eigenvectors() *
                                                  eig.eigenvalues().cwiseMax(Scalar(0)).asDiagonal() *
                                                  eig.eigenvectors().transpose();
  joint.repaired = true;
  auto factor = cholesky_with_jitter(joint.R);
  joint.chol = std::move(factor.lower);
  joint.jitter = factor.jitter;
  return joint;
}

/// J joint prior draws (G(X*), <G, e>) as rows; particle j uses the stream
/// (seed, Matheron, j).
template <typename Scalar>
Matrix<Scalar> draw_joint_prior(const JointPriorCov<Scalar>& joint, std::uint64_t seed, Index j_count) {
  const Index total = joint.R.rows();
  Matrix<Scalar> out(j_count, total);
  parallel_blocks(j_count, 64, [&](Index begin, Index end) {
    Matrix<Scalar> xi(end - begin, total);
    for (Index j = begin; j < end; ++j) {
      RandomStream<Scalar> rng(seed, StreamDomain::Matheron, static_cast<std::uint64_t>(j));
      for (Index c = 0; c < total; ++c) xi(j - begin, c) = rng.normal();
    }
    out.middleRows(begin, end - begin).noalias() = xi * joint.chol.transpose();
  });
  return out;
}

/// Row j of the result is G_j(X*) + E*^T (U_j - <G_j, e>).
template <typename Scalar>
PredictiveDraws<Scalar> matheron_sample(const JointPriorCov<Scalar>& joint, const Matrix<Scalar>& coeffs,
                                        std::uint64_t seed) {
  const Index mp = joint.basis_size();
  if (coeffs.cols() != mp)
    throw InputError("matheron_sample: particles have " + std::to_string(coeffs.cols()) +
                     " coordinates but the joint covariance expects " + std::to_string(mp));
  const Index ns = joint.n_test;
  const Matrix<Scalar> g = draw_joint_prior(joint, seed, coeffs.rows());
  PredictiveDraws<Scalar> draws;
  draws.values = g.leftCols(ns);
  draws.values.noalias() += (coeffs - g.rightCols(mp)) * joint.basis_at_test;
  if (!draws.values.allFinite()) throw NumericalError("matheron_sample: non-finite predictive draw");
  return draws;
}

template <typename Scalar>
PredictiveDraws<Scalar> matheron_sample(const JointPriorCov<Scalar>& joint, const ParticleEnsemble<Scalar>& ens,
                                        std::uint64_t seed) {
  return matheron_sample(joint, ens.coeffs, seed);
}

template <typename Scalar>
PredictiveDraws<Scalar> predict(const SpectralBasis<Scalar>& basis, const Kernel<Scalar>& k,
                                const Matrix<Scalar>& xstar, const ParticleEnsemble<Scalar>& ens,
                                std::uint64_t seed, JointRepair repair = JointRepair::None) {
  return matheron_sample(build_joint(basis, k, xstar, repair), ens, seed);
}

}  // namespace pls
