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

#include <ostream>
#include <string>
#include <vector>

namespace gnnroute {

/// Deterministic double formatting for CSV output ("%.10g"); the same
/// resolved config always reproduces byte-identical files.
std::string format_double(double v);

/// Minimal CSV quoting: fields containing commas, quotes or newlines are
/// wrapped and inner quotes doubled.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace gnnroute
