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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pls/errors.hpp"
#include "pls/likelihoods.hpp"
#include "pls/parallel.hpp"
#include "pls/random.hpp"
#include "pls/spectral.hpp"
#include "pls/types.hpp"

namespace pls {

enum class InitKind { PriorGaussian, Zero, Custom };

/// Euler-Maruyama settings for the projected Langevin SDE.
template <typename Scalar = double>
struct SdeConfig {
  Scalar step_size = Scalar(1e-3);
  Index n_steps = 1000;
  Index n_particles = 100;
  std::uint64_t seed = 0;
  InitKind init = InitKind::PriorGaussian;
  Matrix<Scalar> custom_init;  // J x M', only read for InitKind::Custom

  Scalar horizon() const { return step_size * static_cast<Scalar>(n_steps); }
};

/// J coefficient vectors (rows of `coeffs`) and the random stream each
/// particle draws from. Stream j is keyed by (seed, j), so a particle's
/// trajectory does not depend on how particles are scheduled.
template <typename Scalar = double>
struct ParticleEnsemble {
  Matrix<Scalar> coeffs;  // J x M'
  Scalar time = 0;
  Index steps_taken = 0;
  std::vector<RandomStream<Scalar>> streams;

  Index size() const { return coeffs.rows(); }
  Index dim() const { return coeffs.cols(); }
};

/// Per-step decomposition U' = U + data_drift + prior_drift + noise.
template <typename Scalar = double>
struct DriftTerms {
  Matrix<Scalar> data_drift;   // -eta E dcost(y, E^T U)
  Matrix<Scalar> prior_drift;  // -eta diag(lambda)^-1 U
  Matrix<Scalar> noise;        // sqrt(2 eta) xi
};

template <typename Scalar = double>
struct StepOptions {
  bool inject_noise = true;
  DriftTerms<Scalar>* record = nullptr;  // test hook; filled for the last step taken
};

/// Throws InputError unless eta * max_m(1 / lambda_m) < 2.
template <typename Scalar>
void check_step_stability(Scalar eta, const Vector<Scalar>& lambda) {
  if (!(eta >= 0) || !std::isfinite(eta)) throw InputError("step size must be a finite non-negative number");
  if (lambda.size() == 0) return;
  if (!(lambda.minCoeff() > 0)) throw InputError("basis eigenvalues must be positive");
  const Scalar ratio = eta / lambda.minCoeff();
  if (!(ratio < 2))
    throw InputError("step size " + std::to_string(static_cast<double>(eta)) +
                     " violates the stability guard eta / lambda_min < 2 (lambda_min = " +
                     std::to_string(static_cast<double>(lambda.minCoeff())) + ")");
}

template <typename Scalar>
void validate_config(const SdeConfig<Scalar>& cfg, Index basis_dim, const Vector<Scalar>& lambda) {
  if (!(cfg.step_size > 0)) throw InputError("step size must be positive");
  if (cfg.n_steps < 0) throw InputError("number of steps must be non-negative");
  if (cfg.n_particles < 1) throw InputError("need at least one particle");
  if (cfg.init == InitKind::Custom &&
      (cfg.custom_init.rows() != cfg.n_particles || cfg.custom_init.cols() != basis_dim))
    throw InputError("custom initial ensemble must be " + std::to_string(cfg.n_particles) + " x " +
                     std::to_string(basis_dim) + ", got " + std::to_string(cfg.custom_init.rows()) + " x " +
                     std::to_string(cfg.custom_init.cols()));
  check_step_stability(cfg.step_size, lambda);
}

/// Draws the initial ensemble: PriorGaussian uses coordinate variances
/// lambda_m, Zero starts at the origin, Custom copies cfg.custom_init.
template <typename Scalar>
ParticleEnsemble<Scalar> init_ensemble(const SdeConfig<Scalar>& cfg, const SpectralBasis<Scalar>& basis) {
  validate_config(cfg, basis.size(), basis.eigenvalues);
  const Index j_count = cfg.n_particles;
  const Index dim = basis.size();
  ParticleEnsemble<Scalar> ens;
  ens.streams.reserve(static_cast<std::size_t>(j_count));
  for (Index j = 0; j < j_count; ++j)
    ens.streams.emplace_back(cfg.seed, StreamDomain::Langevin, static_cast<std::uint64_t>(j));

  switch (cfg.init) {
    case InitKind::Zero:
      ens.coeffs = Matrix<Scalar>::Zero(j_count, dim);
      break;
    case InitKind::Custom:
      ens.coeffs = cfg.custom_init;
      break;
    case InitKind::PriorGaussian: {
      ens.coeffs.resize(j_count, dim);
      const Vector<Scalar> sd = basis.eigenvalues.cwiseSqrt();
      parallel_blocks(j_count, 256, [&](Index begin, Index end) {
        for (Index j = begin; j < end; ++j) {
          auto& rng = ens.streams[static_cast<std::size_t>(j)];
          for (Index m = 0; m < dim; ++m) ens.coeffs(j, m) = sd[m] * rng.normal();
        }
      });
      break;
    }
  }
  if (!ens.coeffs.allFinite()) throw InputError("initial ensemble has non-finite entries");
  return ens;
}

namespace detail {

template <typename Scalar>
void advance_rows(ParticleEnsemble<Scalar>& ens, Index begin, Index end, const Matrix<Scalar>& e,
                  const Vector<Scalar>& inv_lambda, const Vector<Scalar>& y, const Likelihood<Scalar>& lik,
                  Scalar eta, Index n_steps, const StepOptions<Scalar>& opts) {
  const Index rows = end - begin;
  const Index dim = ens.dim();
  const Index n = e.cols();
  const Scalar noise_scale = std::sqrt(Scalar(2) * eta);
  Matrix<Scalar> u = ens.coeffs.middleRows(begin, rows);
  Matrix<Scalar> f(rows, n), g(rows, n);
  Matrix<Scalar> data = Matrix<Scalar>::Zero(rows, dim), prior(rows, dim), noise = Matrix<Scalar>::Zero(rows, dim);

  for (Index step = 0; step < n_steps; ++step) {
    if (n > 0) {
      f.noalias() = u * e;
      dcost_rows(lik, y, f, g);
      data.noalias() = g * e.transpose();
      data *= -eta;
    }
    prior.noalias() = (-eta) * (u * inv_lambda.asDiagonal());
    if (opts.inject_noise) {
      for (Index j = 0; j < rows; ++j) {
        auto& rng = ens.streams[static_cast<std::size_t>(begin + j)];
        for (Index m = 0; m < dim; ++m) noise(j, m) = noise_scale * rng.normal();
      }
    }
    u += data + prior + noise;

    for (Index j = 0; j < rows; ++j)
      if (!u.row(j).allFinite()) throw DivergedError(begin + j, ens.steps_taken + step + 1);
  }

  ens.coeffs.middleRows(begin, rows) = u;
  if (opts.record != nullptr && n_steps > 0) {
    opts.record->data_drift.middleRows(begin, rows) = data;
    opts.record->prior_drift.middleRows(begin, rows) = prior;
    opts.record->noise.middleRows(begin, rows) = noise;
  }
}

template <typename Scalar>
void advance(ParticleEnsemble<Scalar>& ens, const Matrix<Scalar>& e, const Vector<Scalar>& lambda,
             const Vector<Scalar>& y, const Likelihood<Scalar>& lik, Scalar eta, Index n_steps,
             const StepOptions<Scalar>& opts) {
  if (e.rows() != ens.dim())
    throw InputError("basis-at-data matrix has " + std::to_string(e.rows()) + " rows but particles have " +
                     std::to_string(ens.dim()) + " coordinates");
  if (lambda.size() != ens.dim()) throw InputError("eigenvalue count does not match particle dimension");
  if (y.size() != e.cols())
    throw InputError("basis-at-data matrix has " + std::to_string(e.cols()) + " columns but there are " +
                     std::to_string(y.size()) + " observations");
  if (static_cast<Index>(ens.streams.size()) != ens.size()) throw InputError("ensemble is missing random streams");
  check_step_stability(eta, lambda);
  check_observations(lik, y);

  if (opts.record != nullptr) {
    opts.record->data_drift = Matrix<Scalar>::Zero(ens.size(), ens.dim());
    opts.record->prior_drift = Matrix<Scalar>::Zero(ens.size(), ens.dim());
    opts.record->noise = Matrix<Scalar>::Zero(ens.size(), ens.dim());
  }
  const Vector<Scalar> inv_lambda = lambda.cwiseInverse();
  parallel_blocks(ens.size(), 64, [&](Index begin, Index end) {
    advance_rows(ens, begin, end, e, inv_lambda, y, lik, eta, n_steps, opts);
  });
  ens.steps_taken += n_steps;
  ens.time += eta * static_cast<Scalar>(n_steps);
}

}  // namespace detail

/// One Euler-Maruyama step for every particle:
///   U <- U - eta E dcost(y, E^T U) - eta diag(lambda)^-1 U + sqrt(2 eta) xi.
template <typename Scalar>
void step(ParticleEnsemble<Scalar>& ens, const Matrix<Scalar>& e, const Vector<Scalar>& lambda,
          const Vector<Scalar>& y, const Likelihood<Scalar>& lik, Scalar eta, const StepOptions<Scalar>& opts = {}) {
  detail::advance(ens, e, lambda, y, lik, eta, Index{1}, opts);
}

/// Initializes the ensemble and runs cfg.n_steps steps; the terminal state
/// is the sample (no burn-in is discarded).
template <typename Scalar>
ParticleEnsemble<Scalar> simulate(const SdeConfig<Scalar>& cfg, const SpectralBasis<Scalar>& basis,
                                  const Matrix<Scalar>& x, const Vector<Scalar>& y, const Likelihood<Scalar>& lik,
                                  const StepOptions<Scalar>& opts = {}) {
  if (x.rows() != y.size())
    throw InputError("simulate: " + std::to_string(x.rows()) + " inputs but " + std::to_string(y.size()) +
                     " observations");
  check_observations(lik, y);
  ParticleEnsemble<Scalar> ens = init_ensemble(cfg, basis);
  const Matrix<Scalar> e = eval_basis(basis, x);
  detail::advance(ens, e, basis.eigenvalues, y, lik, cfg.step_size, cfg.n_steps, opts);
  return ens;
}

/// Largest eigenvalue of E E^T.
template <typename Scalar>
Scalar basis_gram_norm(const Matrix<Scalar>& e) {
  if (e.size() == 0) return Scalar(0);
  const Matrix<Scalar> eet = e * e.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(eet, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("basis_gram_norm: eigendecomposition failed");
  return eig.eigenvalues().maxCoeff();
}

/// Step size 0.5 / (1 / lambda_min + L), with L = ||E E^T||_2 times a bound
/// on the likelihood curvature (user-supplied when the model has none).
template <typename Scalar>
Scalar default_step_size(const Vector<Scalar>& lambda, const Matrix<Scalar>& e, const Likelihood<Scalar>& lik,
                         std::optional<Scalar> curvature = std::nullopt) {
  if (lambda.size() == 0 || !(lambda.minCoeff() > 0)) throw InputError("default_step_size: need positive eigenvalues");
  const std::optional<Scalar> c = curvature ? curvature : curvature_bound(lik);
  if (!c) throw InputError("default_step_size: likelihood has no curvature bound; supply one");
  const Scalar lipschitz = basis_gram_norm(e) * *c;
  return Scalar(0.5) / (Scalar(1) / lambda.minCoeff() + lipschitz);
}

}  // namespace pls
