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

#include "gnnroute/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gnnroute {

namespace {

constexpr const char* kMagic = "gnnroute-params";

void write_doubles_le(std::ostream& out, std::span<const double> values) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      char buf[8];
      for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      out.write(buf, 8);
    }
  }
}

void read_doubles_le(std::istream& in, std::span<double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double& v : values) {
      char buf[8];
      in.read(buf, 8);
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
      std::memcpy(&v, &bits, 8);
    }
  }
}

// Header fields and names travel on single lines; reject embedded whitespace
// that would corrupt the framing.
void validate_token(const std::string& token, const char* what) {
  if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos)
    throw CheckpointError(std::string("invalid ") + what + ": '" + token + "'");
}

}  // namespace

void write_param_container(const std::filesystem::path& file,
                           const std::map<std::string, std::string>& fields,
                           const std::vector<ConstParamRef>& arrays) {
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out << kMagic << " v" << kContainerVersion << "\n";
    for (const auto& [key, value] : fields) {
      validate_token(key, "field key");
      if (value.find_first_of("\r\n") != std::string::npos)
        throw CheckpointError("field value must be single-line: " + key);
      out << "field " << key << " " << value << "\n";
    }
    for (const auto& a : arrays) {
      validate_token(a.name, "array name");
      const std::size_t expect = a.cols == 0 ? static_cast<std::size_t>(a.rows)
                                             : static_cast<std::size_t>(a.rows) * a.cols;
      if (a.values.size() != expect)
        throw CheckpointError("array size does not match declared shape: " + a.name);
      out << "array " << a.name << " " << a.rows << " " << a.cols << "\n";
    }
    out << "data\n";
    for (const auto& a : arrays) write_doubles_le(out, a.values);
    if (!out) throw CheckpointError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

const std::string& LoadedContainer::field(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end()) throw CheckpointError("missing header field: " + key);
  return it->second;
}

int LoadedContainer::int_field(const std::string& key) const {
  const std::string& v = field(key);
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw CheckpointError("header field " + key + " is not an integer: " + v);
  }
}

LoadedContainer read_param_container(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + file.string());

  std::string line;
  if (!std::getline(in, line)) throw CheckpointError(file.string() + ": empty file");
  {
    std::istringstream head(line);
    std::string magic, version;
    head >> magic >> version;
    if (magic != kMagic)
      throw CheckpointError(file.string() + ": not a parameter container");
    if (version != "v" + std::to_string(kContainerVersion))
      throw CheckpointError(file.string() + ": unsupported container version " + version);
  }

  LoadedContainer loaded;
  std::vector<std::pair<std::string, std::pair<int, int>>> directory;
  bool in_data = false;
  while (std::getline(in, line)) {
    if (line == "data") {
      in_data = true;
      break;
    }
    std::istringstream row(line);
    std::string kind;
    row >> kind;
    if (kind == "field") {
      std::string key;
      row >> key;
      std::string value;
      std::getline(row, value);
      if (!value.empty() && value.front() == ' ') value.erase(value.begin());
      if (key.empty()) throw CheckpointError(file.string() + ": malformed field line");
      loaded.fields[key] = value;
    } else if (kind == "array") {
      std::string name;
      int rows = -1, cols = -1;
      row >> name >> rows >> cols;
      if (name.empty() || rows < 0 || cols < 0 || row.fail())
        throw CheckpointError(file.string() + ": malformed array line: " + line);
      directory.emplace_back(name, std::make_pair(rows, cols));
    } else {
      throw CheckpointError(file.string() + ": unexpected header line: " + line);
    }
  }
  if (!in_data) throw CheckpointError(file.string() + ": missing data section");

  for (const auto& [name, shape] : directory) {
    LoadedArray array;
    array.rows = shape.first;
    array.cols = shape.second;
    const std::size_t count = array.cols == 0
                                  ? static_cast<std::size_t>(array.rows)
                                  : static_cast<std::size_t>(array.rows) * array.cols;
    array.data.resize(count);
    read_doubles_le(in, array.data);
    if (!in) throw CheckpointError(file.string() + ": truncated payload at array " + name);
    loaded.array_names.push_back(name);
    loaded.arrays.emplace(name, std::move(array));
  }
  return loaded;
}

}  // namespace gnnroute
