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

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnnroute/nn.hpp"

namespace gnnroute {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Versioned parameter container: a text header (format version plus
/// free-form key/value fields and the array directory) followed by the
/// arrays' float64 payload in little-endian byte order. Loading validates
/// every shape against the directory.
///
///   gnnroute-params v1
///   field <key> <value>
///   array <name> <rows> <cols>
///   data
///   <binary payload>
inline constexpr int kContainerVersion = 1;

/// Writes atomically (temp file in the same directory, then rename).
void write_param_container(const std::filesystem::path& file,
                           const std::map<std::string, std::string>& fields,
                           const std::vector<ConstParamRef>& arrays);

struct LoadedArray {
  int rows = 0;
  int cols = 0;  // 0 marks a flat vector of length `rows`
  std::vector<double> data;
};

struct LoadedContainer {
  std::map<std::string, std::string> fields;
  std::vector<std::string> array_names;  // in file order
  std::map<std::string, LoadedArray> arrays;

  /// Field accessors that throw CheckpointError when missing/malformed.
  const std::string& field(const std::string& key) const;
  int int_field(const std::string& key) const;
};

LoadedContainer read_param_container(const std::filesystem::path& file);

}  // namespace gnnroute
