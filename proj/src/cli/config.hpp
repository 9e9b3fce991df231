// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace diffpir::cli {

enum class ValueType { kString, kInt, kUnsigned, kDouble, kBool };

struct KeySpec {
  const char* key;
  ValueType type;
  const char* default_value;
  const char* help;
};

/// Every recognized configuration key. Flag names are the keys with '_' -> '-'.
const std::vector<KeySpec>& key_specs();

/// Flat string-valued configuration with typed accessors. Values come from
/// defaults, then a config file, then command-line flags.
class Settings {
 public:
  Settings();

  /// Throws InvalidConfig for unknown keys. Keys may use '-' or '_'.
  void set(const std::string& key, const std::string& value);
  bool explicitly_set(const std::string& key) const;
  /// Restores the default value and clears the explicit mark.
  void reset(const std::string& key);

  const std::string& str(const std::string& key) const;
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::uint64_t seed() const;

  /// Comma-separated list; an empty value yields an empty list.
  std::vector<double> real_list(const std::string& key) const;
  std::vector<long long> integer_list(const std::string& key) const;

  /// Every key with its typed value.
  nlohmann::json to_json() const;

 private:
  const KeySpec& spec(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

std::string normalize_key(std::string key);

/// Loads a config file into `settings`. A file whose first non-blank character
/// is '{' is read as a flat JSON object, otherwise as key = value lines with
/// '#' comments.
void load_config_file(const std::string& path, Settings& settings);

/// Parses key = value text.
void load_config_text(const std::string& text, Settings& settings);

}  // namespace diffpir::cli
