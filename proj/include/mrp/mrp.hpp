// Copyright 2026 The mrp Authors
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

// Umbrella header.

#pragma once

#include "mrp/engine.hpp"     // IWYU pragma: export
#include "mrp/error.hpp"      // IWYU pragma: export
#include "mrp/graph.hpp"      // IWYU pragma: export
#include "mrp/harness.hpp"    // IWYU pragma: export
#include "mrp/io.hpp"         // IWYU pragma: export
#include "mrp/metrics.hpp"    // IWYU pragma: export
#include "mrp/oracle.hpp"     // IWYU pragma: export
#include "mrp/params.hpp"     // IWYU pragma: export
#include "mrp/rng.hpp"        // IWYU pragma: export
#include "mrp/synth.hpp"      // IWYU pragma: export
#include "mrp/version.hpp"    // IWYU pragma: export
