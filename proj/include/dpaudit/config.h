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

// Plain "key = value" configuration files. '#' starts a comment; later
// keys override earlier ones.

#ifndef DPAUDIT_CONFIG_H_
#define DPAUDIT_CONFIG_H_

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpaudit {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig Parse(std::istream& in);
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> Get(const std::string& key) const;
  // Throw DomainError when present but unparsable.
  std::optional<double> GetDouble(const std::string& key) const;
  std::optional<long long> GetInt(const std::string& key) const;
  std::optional<std::vector<double>> GetDoubleList(
      const std::string& key) const;

  void Set(const std::string& key, std::string value);
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Splits on `sep` and trims blanks; empty fields are dropped.
std::vector<std::string> SplitList(const std::string& text, char sep);

}  // namespace dpaudit

#endif  // DPAUDIT_CONFIG_H_
