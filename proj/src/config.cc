//
// Copyright 2026 The DP Audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpaudit/config.h"

#include <charconv>
#include <fstream>

#include "dpaudit/error.h"

namespace dpaudit {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DomainError("config key '" + key + "': '" + text +
                      "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<std::string> SplitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(sep, start);
    const std::string field = Trim(text.substr(
        start, end == std::string::npos ? std::string::npos : end - start));
    if (!field.empty()) out.push_back(field);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

KeyValueConfig KeyValueConfig::Parse(std::istream& in) {
  KeyValueConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError("config line " + std::to_string(lineno) +
                    ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw IoError("config line " + std::to_string(lineno) + ": empty key");
    }
    c.values_[key] = Trim(line.substr(eq + 1));
  }
  return c;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return Parse(in);
}

std::optional<std::string> KeyValueConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::GetDouble(const std::string& key) const {
  auto v = Get(key);
  if (!v) return std::nullopt;
  return ToDouble(key, *v);
}

std::optional<long long> KeyValueConfig::GetInt(const std::string& key) const {
  auto v = Get(key);
  if (!v) return std::nullopt;
  long long out = 0;
  auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw DomainError("config key '" + key + "': '" + *v +
                      "' is not an integer");
  }
  return out;
}

std::optional<std::vector<double>> KeyValueConfig::GetDoubleList(
    const std::string& key) const {
  auto v = Get(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  for (const auto& field : SplitList(*v, ',')) {
    out.push_back(ToDouble(key, field));
  }
  return out;
}

void KeyValueConfig::Set(const std::string& key, std::string value) {
  values_[key] = std::move(value);
}

}  // namespace dpaudit
