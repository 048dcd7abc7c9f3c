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
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "pls/errors.hpp"
#include "pls/random.hpp"
#include "pls/types.hpp"

namespace pls {

// Each observation model provides the pointwise cost c(y, f) = -log p(y | f)
// up to an additive constant, its derivative in f, and the fully normalized
// log density used for reporting.

template <typename Scalar = double>
struct Gaussian {
  Scalar noise_variance;

  explicit Gaussian(Scalar noise_var) : noise_variance(noise_var) {
    if (!(noise_variance > 0) || !std::isfinite(noise_variance))
      throw InputError("gaussian likelihood: noise variance must be positive");
  }
  static constexpr std::string_view name() { return "gaussian"; }
  bool in_support(Scalar y) const { return std::isfinite(y); }
  Scalar cost(Scalar y, Scalar f) const { return (y - f) * (y - f) / (Scalar(2) * noise_variance); }
  Scalar dcost(Scalar y, Scalar f) const { return (f - y) / noise_variance; }
  Scalar log_density(Scalar y, Scalar f) const {
    return -Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * noise_variance) - cost(y, f);
  }
  std::optional<Scalar> curvature_bound() const { return Scalar(1) / noise_variance; }
};

template <typename Scalar = double>
struct BernoulliLogistic {
  static constexpr std::string_view name() { return "bernoulli"; }
  static Scalar sigmoid(Scalar f) {
    if (f >= 0) return Scalar(1) / (Scalar(1) + std::exp(-f));
    const Scalar e = std::exp(f);
    return e / (Scalar(1) + e);
  }
  static Scalar softplus(Scalar f) { return f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f)); }

  bool in_support(Scalar y) const { return y == Scalar(0) || y == Scalar(1); }
  // -y log s(f) - (1 - y) log(1 - s(f)) = softplus(f) - y f
  Scalar cost(Scalar y, Scalar f) const { return softplus(f) - y * f; }
  Scalar dcost(Scalar y, Scalar f) const { return sigmoid(f) - y; }
  Scalar log_density(Scalar y, Scalar f) const { return -cost(y, f); }
  std::optional<Scalar> curvature_bound() const { return Scalar(0.25); }
};

/// Poisson counts with rate f^2. |f| is clamped below at `clamp`, keeping
/// the sign, so the cost is symmetric in f and finite at 0.
template <typename Scalar = double>
struct PoissonSquared {
  Scalar clamp = Scalar(1e-6);

  PoissonSquared() = default;
  explicit PoissonSquared(Scalar delta) : clamp(delta) {
    if (!(clamp > 0)) throw InputError("poisson likelihood: clamp must be positive");
  }
  static constexpr std::string_view name() { return "poisson"; }
  Scalar clamped(Scalar f) const {
    const Scalar a = std::abs(f);
    if (a >= clamp) return f;
    return std::signbit(f) ? -clamp : clamp;
  }
  bool in_support(Scalar y) const { return y >= 0 && std::isfinite(y) && y == std::floor(y); }
  Scalar cost(Scalar y, Scalar f) const {
    const Scalar g = clamped(f);
    const Scalar lg = y > 0 ? Scalar(2) * y * std::log(std::abs(g)) : Scalar(0);
    return -lg + g * g;
  }
  Scalar dcost(Scalar y, Scalar f) const {
    const Scalar g = clamped(f);
    return -Scalar(2) * y / g + Scalar(2) * g;
  }
  Scalar log_density(Scalar y, Scalar f) const { return -cost(y, f) - std::lgamma(y + Scalar(1)); }
  /// Second derivative 2y/f^2 + 2 evaluated where the rate matches the count.
  std::optional<Scalar> curvature_bound() const { return Scalar(4); }
};

/// Location-scale Student-t; the normalizing constant is dropped from cost.
template <typename Scalar = double>
struct StudentT {
  Scalar dof;
  Scalar scale;

  StudentT(Scalar nu, Scalar sigma) : dof(nu), scale(sigma) {
    if (!(dof > 0) || !std::isfinite(dof)) throw InputError("student_t likelihood: dof must be positive");
    if (!(scale > 0) || !std::isfinite(scale)) throw InputError("student_t likelihood: scale must be positive");
  }
  static constexpr std::string_view name() { return "student_t"; }
  bool in_support(Scalar y) const { return std::isfinite(y); }
  Scalar cost(Scalar y, Scalar f) const {
    const Scalar r = y - f;
    return Scalar(0.5) * (dof + Scalar(1)) * std::log1p(r * r / (dof * scale * scale));
  }
  Scalar dcost(Scalar y, Scalar f) const {
    const Scalar r = y - f;
    return (dof + Scalar(1)) * (f - y) / (dof * scale * scale + r * r);
  }
  Scalar log_density(Scalar y, Scalar f) const {
    return std::lgamma(Scalar(0.5) * (dof + Scalar(1))) - std::lgamma(Scalar(0.5) * dof) -
           Scalar(0.5) * std::log(dof * std::numbers::pi_v<Scalar> * scale * scale) - cost(y, f);
  }
  std::optional<Scalar> curvature_bound() const { return (dof + Scalar(1)) / (dof * scale * scale); }
};

/// y = f + s b + eps with b ~ Bernoulli(mix) unobserved and eps ~ N(0, noise).
/// Cost drops the Gaussian normalizer so that it matches Gaussian's cost as
/// mix -> 0.
template <typename Scalar = double>
struct ShiftMixture {
  Scalar shift;
  Scalar mix;
  Scalar noise_variance;

  ShiftMixture(Scalar s, Scalar alpha, Scalar noise_var) : shift(s), mix(alpha), noise_variance(noise_var) {
    if (!std::isfinite(shift)) throw InputError("shift likelihood: shift must be finite");
    if (!(mix > 0 && mix < 1)) throw InputError("shift likelihood: mixing weight must lie in (0, 1)");
    if (!(noise_variance > 0) || !std::isfinite(noise_variance))
      throw InputError("shift likelihood: noise variance must be positive");
  }
  static constexpr std::string_view name() { return "shift"; }
  bool in_support(Scalar y) const { return std::isfinite(y); }

  // log weights of the shifted / unshifted components
  void component_logs(Scalar y, Scalar f, Scalar& a_shift, Scalar& a_plain) const {
    const Scalar r0 = y - f;
    const Scalar r1 = r0 - shift;
    a_shift = std::log(mix) - r1 * r1 / (Scalar(2) * noise_variance);
    a_plain = std::log1p(-mix) - r0 * r0 / (Scalar(2) * noise_variance);
  }
  Scalar cost(Scalar y, Scalar f) const {
    Scalar a1, a0;
    component_logs(y, f, a1, a0);
    const Scalar hi = std::max(a1, a0);
    return -(hi + std::log1p(std::exp(std::min(a1, a0) - hi)));
  }
  Scalar dcost(Scalar y, Scalar f) const {
    Scalar a1, a0;
    component_logs(y, f, a1, a0);
    // responsibility of the shifted component, via the logistic of the log-odds
    const Scalar w = BernoulliLogistic<Scalar>::sigmoid(a1 - a0);
    const Scalar r0 = y - f;
    return -(w * (r0 - shift) + (Scalar(1) - w) * r0) / noise_variance;
  }
  Scalar log_density(Scalar y, Scalar f) const {
    return -Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * noise_variance) - cost(y, f);
  }
  /// sup |c''|: c'' = 1/s2 - w (1 - w) shift^2 / s2^2 with w (1 - w) <= 1/4.
  std::optional<Scalar> curvature_bound() const {
    const Scalar inv = Scalar(1) / noise_variance;
    return std::max(inv, shift * shift * inv * inv / Scalar(4) - inv);
  }
};

template <typename Scalar = double>
using Likelihood = std::variant<Gaussian<Scalar>, BernoulliLogistic<Scalar>, PoissonSquared<Scalar>,
                                StudentT<Scalar>, ShiftMixture<Scalar>>;

template <typename Scalar>
std::string_view likelihood_name(const Likelihood<Scalar>& lik) {
  return std::visit([](const auto& l) { return l.name(); }, lik);
}

namespace detail {
template <typename Scalar, typename L>
void check_support(const L& l, Scalar y, Index index) {
  if (!l.in_support(y))
    throw InputError(std::string(l.name()) + " likelihood: observation " + std::to_string(static_cast<double>(y)) +
                     (index >= 0 ? " at index " + std::to_string(index) : std::string()) + " is outside the support");
}
}  // namespace detail

template <typename Scalar>
Scalar cost(const Likelihood<Scalar>& lik, Scalar y, Scalar f) {
  return std::visit(
      [&](const auto& l) {
        detail::check_support(l, y, -1);
        return l.cost(y, f);
      },
      lik);
}

template <typename Scalar>
Scalar dcost(const Likelihood<Scalar>& lik, Scalar y, Scalar f) {
  return std::visit(
      [&](const auto& l) {
        detail::check_support(l, y, -1);
        return l.dcost(y, f);
      },
      lik);
}

template <typename Scalar>
Scalar log_density(const Likelihood<Scalar>& lik, Scalar y, Scalar f) {
  return std::visit(
      [&](const auto& l) {
        detail::check_support(l, y, -1);
        return l.log_density(y, f);
      },
      lik);
}

template <typename Scalar>
std::optional<Scalar> curvature_bound(const Likelihood<Scalar>& lik) {
  return std::visit([](const auto& l) { return l.curvature_bound(); }, lik);
}

/// Throws InputError naming the first observation outside the support.
template <typename Scalar>
void check_observations(const Likelihood<Scalar>& lik, const Vector<Scalar>& y) {
  std::visit(
      [&](const auto& l) {
        for (Index i = 0; i < y.size(); ++i) detail::check_support(l, y[i], i);
      },
      lik);
}

/// Elementwise dcost. Support violations and non-finite derivatives are
/// reported with the index of the first failure.
template <typename Scalar>
Vector<Scalar> batch_dcost(const Likelihood<Scalar>& lik, const Vector<Scalar>& y, const Vector<Scalar>& f) {
  if (y.size() != f.size())
    throw InputError("batch_dcost: " + std::to_string(y.size()) + " observations but " + std::to_string(f.size()) +
                     " predictions");
  Vector<Scalar> out(y.size());
  std::visit(
      [&](const auto& l) {
        for (Index i = 0; i < y.size(); ++i) {
          detail::check_support(l, y[i], i);
          out[i] = l.dcost(y[i], f[i]);
          if (!std::isfinite(out[i]))
            throw NumericalError(std::string(l.name()) + " likelihood: non-finite derivative at index " +
                                 std::to_string(i));
        }
      },
      lik);
  return out;
}

/// Sum of costs l_N(f) = sum_n c(y_n, f_n).
template <typename Scalar>
Scalar total_cost(const Likelihood<Scalar>& lik, const Vector<Scalar>& y, const Vector<Scalar>& f) {
  if (y.size() != f.size()) throw InputError("total_cost: observation/prediction size mismatch");
  return std::visit(
      [&](const auto& l) {
        Scalar acc = 0;
        for (Index i = 0; i < y.size(); ++i) acc += l.cost(y[i], f[i]);
        return acc;
      },
      lik);
}

/// Writes out(j, n) = dcost(y_n, f(j, n)) for a block of particles without
/// support checks (callers validate y once up front).
template <typename Scalar, typename DerivedF, typename DerivedOut>
void dcost_rows(const Likelihood<Scalar>& lik, const Vector<Scalar>& y, const Eigen::MatrixBase<DerivedF>& f,
                Eigen::MatrixBase<DerivedOut>& out) {
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Gaussian<Scalar>>) {
          out.derived().noalias() = (f.rowwise() - y.transpose()) / l.noise_variance;
        } else {
          for (Index n = 0; n < f.cols(); ++n) {
            const Scalar yn = y[n];
            for (Index j = 0; j < f.rows(); ++j) out(j, n) = l.dcost(yn, f(j, n));
          }
        }
      },
      lik);
}

/// Draws an observation given latent value f (used for predictive intervals).
template <typename Scalar>
Scalar sample_observation(const Likelihood<Scalar>& lik, Scalar f, RandomStream<Scalar>& rng) {
  struct Visitor {
    Scalar f;
    RandomStream<Scalar>& rng;
    Scalar operator()(const Gaussian<Scalar>& l) const { return f + std::sqrt(l.noise_variance) * rng.normal(); }
    Scalar operator()(const BernoulliLogistic<Scalar>& l) const {
      return rng.uniform() < l.sigmoid(f) ? Scalar(1) : Scalar(0);
    }
    Scalar operator()(const PoissonSquared<Scalar>&) const {
      std::poisson_distribution<long long> pois(std::max(static_cast<double>(f * f), 1e-300));
      return static_cast<Scalar>(pois(rng.engine()));
    }
    Scalar operator()(const StudentT<Scalar>& l) const {
      std::student_t_distribution<Scalar> t(l.dof);
      return f + l.scale * t(rng.engine());
    }
    Scalar operator()(const ShiftMixture<Scalar>& l) const {
      const Scalar b = rng.uniform() < l.mix ? l.shift : Scalar(0);
      return f + b + std::sqrt(l.noise_variance) * rng.normal();
    }
  };
  return std::visit(Visitor{f, rng}, lik);
}

/// Mean of y given latent value f.
template <typename Scalar>
Scalar observation_mean(const Likelihood<Scalar>& lik, Scalar f) {
  struct Visitor {
    Scalar f;
    Scalar operator()(const Gaussian<Scalar>&) const { return f; }
    Scalar operator()(const BernoulliLogistic<Scalar>& l) const { return l.sigmoid(f); }
    Scalar operator()(const PoissonSquared<Scalar>&) const { return f * f; }
    Scalar operator()(const StudentT<Scalar>&) const { return f; }
    Scalar operator()(const ShiftMixture<Scalar>& l) const { return f + l.mix * l.shift; }
  };
  return std::visit(Visitor{f}, lik);
}

}  // namespace pls
