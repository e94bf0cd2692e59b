// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON (de)serialization shared across modules. Private to the library.

#pragma once

#include "deepnrc/data.hpp"
#include "deepnrc/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <initializer_list>
#include <set>
#include <string>

namespace deepnrc::detail {

using json = nlohmann::json;

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// JSON number, or null when the optional is empty or non-finite.
inline json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

/// Rejects keys of `obj` outside `allowed`; `path` prefixes error fields.
inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const std::set<std::string_view> known(allowed);
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

inline std::string join_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

json to_json(const data::GeneratorSpec& spec);
data::GeneratorSpec generator_from_json(const json& j, const std::string& path);

}  // namespace deepnrc::detail

#include "deepnrc/nn.hpp"

namespace deepnrc::detail {

json to_json(const nn::MlpArchitecture& arch);
nn::MlpArchitecture architecture_from_json(const json& j, const std::string& path);
json to_json(const nn::TrainSchedule& schedule);
nn::TrainSchedule schedule_from_json(const json& j, const std::string& path);

}  // namespace deepnrc::detail
