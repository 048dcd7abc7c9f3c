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
#include <stdexcept>
#include <string>

namespace pls {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, shapes or data; maps to CLI exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Factorization or solver failure; maps to CLI exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Every eigenvalue of the scaled Gram matrix fell below the rank floor.
class DegenerateKernelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A particle left the finite reals during Langevin simulation.
class DivergedError : public NumericalError {
 public:
  DivergedError(std::int64_t particle, std::int64_t step)
      : NumericalError("Langevin simulation diverged: particle " +
                       std::to_string(particle) + " became non-finite at step " +
                       std::to_string(step)),
        particle_(particle),
        step_(step) {}

  std::int64_t particle() const { return particle_; }
  std::int64_t step() const { return step_; }

 private:
  std::int64_t particle_;
  std::int64_t step_;
};

/// File system or format errors; maps to CLI exit code 3.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pls
