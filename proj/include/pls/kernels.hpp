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
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pls/errors.hpp"
#include "pls/random.hpp"
#include "pls/types.hpp"

namespace pls {

enum class KernelFamily { SquaredExponential, Matern12, Matern32, Matern52 };

inline std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "se";
    case KernelFamily::Matern12: return "matern12";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "se" || name == "rbf" || name == "squared_exponential") return KernelFamily::SquaredExponential;
  if (name == "matern12") return KernelFamily::Matern12;
  if (name == "matern32") return KernelFamily::Matern32;
  if (name == "matern52") return KernelFamily::Matern52;
  throw InputError("unknown kernel family '" + std::string(name) +
                   "' (expected se, matern12, matern32 or matern52)");
}

/// Stationary ARD kernel k(x, x') = s2 * g(|(x - x') / l|).
template <typename Scalar = double>
class Kernel {
 public:
  Kernel(KernelFamily family, Vector<Scalar> lengthscales, Scalar signal_variance)
      : family_(family), lengthscales_(std::move(lengthscales)), signal_variance_(signal_variance) {
    if (lengthscales_.size() == 0) throw InputError("kernel needs at least one lengthscale");
    for (Index d = 0; d < lengthscales_.size(); ++d)
      if (!(lengthscales_[d] > 0) || !std::isfinite(lengthscales_[d]))
        throw InputError("kernel lengthscales must be positive and finite");
    if (!(signal_variance_ > 0) || !std::isfinite(signal_variance_))
      throw InputError("kernel signal variance must be positive and finite");
  }

  static Kernel isotropic(KernelFamily family, Index dim, Scalar lengthscale, Scalar signal_variance) {
    return Kernel(family, Vector<Scalar>::Constant(dim, lengthscale), signal_variance);
  }

  KernelFamily family() const { return family_; }
  const Vector<Scalar>& lengthscales() const { return lengthscales_; }
  Scalar signal_variance() const { return signal_variance_; }
  Index dim() const { return lengthscales_.size(); }

  /// Kernel value as a function of the lengthscale-scaled squared distance.
  Scalar from_scaled_sq_distance(Scalar r2) const {
    using std::exp;
    using std::sqrt;
    switch (family_) {
      case KernelFamily::SquaredExponential:
        return signal_variance_ * exp(Scalar(-0.5) * r2);
      case KernelFamily::Matern12:
        return signal_variance_ * exp(-sqrt(r2));
      case KernelFamily::Matern32: {
        const Scalar t = sqrt(Scalar(3) * r2);
        return signal_variance_ * (Scalar(1) + t) * exp(-t);
      }
      case KernelFamily::Matern52: {
        const Scalar t = sqrt(Scalar(5) * r2);
        return signal_variance_ * (Scalar(1) + t + t * t / Scalar(3)) * exp(-t);
      }
    }
    return Scalar(0);
  }

  template <typename DerivedA, typename DerivedB>
  Scalar operator()(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& xp) const {
    if (x.size() != dim() || xp.size() != dim())
      throw InputError("kernel input dimension " + std::to_string(x.size()) + "/" +
                       std::to_string(xp.size()) + " does not match " + std::to_string(dim()) +
                       " lengthscales");
    Scalar r2 = 0;
    for (Index d = 0; d < dim(); ++d) {
      const Scalar t = (x(d) - xp(d)) / lengthscales_[d];
      r2 += t * t;
    }
    return from_scaled_sq_distance(r2);
  }

 private:
  KernelFamily family_;
  Vector<Scalar> lengthscales_;
  Scalar signal_variance_;
};

template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar eval_kernel(const Kernel<Scalar>& k, const Eigen::MatrixBase<DerivedA>& x,
                   const Eigen::MatrixBase<DerivedB>& xp) {
  return k(x, xp);
}

/// Gram matrix with entry (i, j) = k(a_i, b_j); rows are points.
template <typename Scalar>
Matrix<Scalar> gram(const Kernel<Scalar>& k, const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != k.dim() || b.cols() != k.dim())
    throw InputError("gram: inputs have " + std::to_string(a.cols()) + "/" + std::to_string(b.cols()) +
                     " columns but the kernel has " + std::to_string(k.dim()) + " lengthscales");
  // Scale once; differences are taken coordinate-wise (no norm expansion)
  // so that k(x, x) is exactly the signal variance.
  const RowVector<Scalar> inv_l = k.lengthscales().cwiseInverse().transpose();
  const Matrix<Scalar> as = a.array().rowwise() * inv_l.array();
  const Matrix<Scalar> bs = b.array().rowwise() * inv_l.array();
  Matrix<Scalar> out(a.rows(), b.rows());
  const Index dim = k.dim();
#pragma omp parallel for schedule(static) if (a.rows() * b.rows() > 65536)
  for (Index j = 0; j < bs.rows(); ++j) {
    for (Index i = 0; i < as.rows(); ++i) {
      Scalar r2 = 0;
      for (Index d = 0; d < dim; ++d) {
        const Scalar t = as(i, d) - bs(j, d);
        r2 += t * t;
      }
      out(i, j) = k.from_scaled_sq_distance(r2);
    }
  }
  return out;
}

/// Anchor points of the empirical base measure nu = (1/S) sum_s delta_{xi_s}.
template <typename Scalar = double>
class AnchorSet {
 public:
  explicit AnchorSet(Matrix<Scalar> points) : points_(std::move(points)) {
    if (points_.rows() < 1) throw InputError("anchor set must contain at least one point");
    if (!points_.allFinite()) throw InputError("anchor points must be finite");
  }

  /// Empirical measure over the training inputs; when there are more than
  /// `cap` rows, a uniform random subsample of size `cap` (without
  /// replacement) is used instead.
  static AnchorSet from_training(const Matrix<Scalar>& x, Index cap = 2000, std::uint64_t seed = 0) {
    if (x.rows() <= cap) return AnchorSet(x);
    std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    RandomStream<Scalar> rng(seed, StreamDomain::Selection, 1);
    // partial Fisher-Yates
    for (Index i = 0; i < cap; ++i) {
      const auto span = static_cast<std::uint64_t>(x.rows() - i);
      const Index j = i + static_cast<Index>(std::min<std::uint64_t>(
                              static_cast<std::uint64_t>(rng.uniform() * static_cast<Scalar>(span)), span - 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::sort(idx.begin(), idx.begin() + cap);
    Matrix<Scalar> pts(cap, x.cols());
    for (Index i = 0; i < cap; ++i) pts.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
    return AnchorSet(std::move(pts));
  }

  const Matrix<Scalar>& points() const { return points_; }
  Index size() const { return points_.rows(); }
  Scalar weight() const { return Scalar(1) / static_cast<Scalar>(points_.rows()); }

 private:
  Matrix<Scalar> points_;
};

/// Smoothed kernel r(a, b) = integral k(a, xi) k(xi, b) dnu(xi) under the
/// empirical anchor measure: (1/S) k(A, S) k(S, B).
template <typename Scalar>
Matrix<Scalar> r_gram(const Kernel<Scalar>& k, const Matrix<Scalar>& a, const Matrix<Scalar>& b,
                      const AnchorSet<Scalar>& anchors) {
  const Matrix<Scalar> ka = gram(k, a, anchors.points());
  if (&a == &b) {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(a.rows(), a.rows());
    out.template selfadjointView<Eigen::Lower>().rankUpdate(ka, anchors.weight());
    return out.template selfadjointView<Eigen::Lower>();
  }
  const Matrix<Scalar> kb = gram(k, b, anchors.points());
  return anchors.weight() * (ka * kb.transpose());
}

/// Diagonal of r_gram(k, a, a, anchors).
template <typename Scalar>
Vector<Scalar> r_diagonal(const Kernel<Scalar>& k, const Matrix<Scalar>& a, const AnchorSet<Scalar>& anchors) {
  const Matrix<Scalar> ka = gram(k, a, anchors.points());
  return anchors.weight() * ka.rowwise().squaredNorm();
}

}  // namespace pls
