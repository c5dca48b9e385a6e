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

#include <string>
#include <vector>

namespace gnnroute {

/// Full CLI: parses argv (subcommands train/eval/zoo-sweep/link-failures/
/// filter/gradcheck, common flags, optional key=value config file with CLI
/// precedence) and dispatches. `args` excludes the program name. Returns
/// the process exit code (see ExitCode).
int run_cli(const std::vector<std::string>& args);

}  // namespace gnnroute
