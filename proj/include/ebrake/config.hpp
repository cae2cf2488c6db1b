#pragma once

// Plain-text configuration: one "key = value" per line, '#' starts a comment.
// Unknown keys are errors. Each record type has a fixed key table used for
// loading, single-key overrides and dumps.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ebrake/env.hpp"
#include "ebrake/family.hpp"
#include "ebrake/train.hpp"

namespace ebrake {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Throws ConfigError naming `source` and the line on malformed input.
std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source);

template <class T>
struct ConfigSchema {
  /// Applies one key; throws ConfigError for unknown keys or bad values.
  static void set(T& target, const std::string& key, const std::string& value);
  static std::string get(const T& target, const std::string& key);
  static std::vector<std::string> keys();
};

/// Overlays every key of the stream (or file) onto `target`.
template <class T>
void load_config(T& target, std::istream& in, const std::string& source);
template <class T>
void load_config_file(T& target, const std::string& path);

/// Every key in table order, one per line, values round-tripping exactly.
template <class T>
std::string dump_config(const T& target);

}  // namespace ebrake
