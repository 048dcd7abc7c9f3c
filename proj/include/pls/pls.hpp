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

#include "pls/diagnostics.hpp"
#include "pls/errors.hpp"
#include "pls/kernels.hpp"
#include "pls/likelihoods.hpp"
#include "pls/linalg.hpp"
#include "pls/model_selection.hpp"
#include "pls/parallel.hpp"
#include "pls/predictor.hpp"
#include "pls/random.hpp"
#include "pls/sampler.hpp"
#include "pls/spectral.hpp"
#include "pls/types.hpp"
