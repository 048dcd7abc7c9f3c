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
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pls/errors.hpp"
#include "pls/types.hpp"

namespace pls {

/// Number of workers available to parallel loops.
inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

/// Applies PLS_THREADS (positive integer; 0 = auto) if present.
inline void configure_workers_from_env() {
  const char* raw = std::getenv("PLS_THREADS");
  if (raw == nullptr || *raw == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || n < 0)
    throw InputError(std::string("PLS_THREADS must be a non-negative integer, got '") + raw + "'");
  if (n > 0) set_worker_count(static_cast<int>(n));
}

/// Runs body(begin, end) over [0, n) split into fixed blocks of `block`
/// items. Block boundaries do not depend on the worker count, and the
/// exception from the lowest failing block is rethrown.
template <typename Body>
void parallel_blocks(Index n, Index block, Body&& body) {
  if (n <= 0) return;
  const Index n_blocks = (n + block - 1) / block;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_blocks));
#pragma omp parallel for schedule(dynamic, 1)
  for (Index b = 0; b < n_blocks; ++b) {
    try {
      const Index begin = b * block;
      const Index end = std::min(n, begin + block);
      body(begin, end);
    } catch (...) {
      errors[static_cast<std::size_t>(b)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pls
