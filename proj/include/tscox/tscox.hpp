// Copyright 2026 The tscox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TSCOX_TSCOX_HPP
#define TSCOX_TSCOX_HPP

/// \file
/// Umbrella header.

#include "tscox/covariance.hpp"
#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"
#include "tscox/inference.hpp"
#include "tscox/integration.hpp"
#include "tscox/likelihood.hpp"
#include "tscox/model.hpp"
#include "tscox/pattern.hpp"
#include "tscox/posterior.hpp"
#include "tscox/random.hpp"
#include "tscox/simulate.hpp"
#include "tscox/stats.hpp"

#endif  // TSCOX_TSCOX_HPP
