// Copyright 2026 The gnnroute Authors
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

#pragma once

#include <cstddef>
#include <functional>

namespace gnnroute {

/// Worker count used by parallel_for. Defaults to the hardware concurrency;
/// the GNNROUTE_THREADS environment variable overrides it (1 disables
/// threading entirely).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across worker threads. Callers that need
/// determinism write results into index-addressed slots and reduce in index
/// order afterwards; the scheduling itself imposes no ordering.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gnnroute
