/* Copyright 2026 The padgsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <json.hpp>
#include <set>
#include <string>
#include <utility>

#include "padgsim/errors.hpp"

namespace padg {

// Strict reader over one JSON object: every key must be consumed through
// required()/optional() before finish(), otherwise the unknown key is
// reported with its full path.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ValidationError(path_.empty() ? "<root>" : path_,
                            "expected an object");
    }
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const {
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) {
      throw ValidationError(child(key), "required field missing");
    }
    return obj_.at(key);
  }

  template <typename T>
  T required(const std::string& key) {
    return convert<T>(raw(key), child(key));
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!has(key)) {
      return fallback;
    }
    return convert<T>(obj_.at(key), child(key));
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw ValidationError(child(item.key()), "unknown field");
      }
    }
  }

  template <typename T>
  static T convert(const nlohmann::json& value, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) {
          throw ValidationError(path, "expected a number");
        }
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!value.is_number_integer()) {
          throw ValidationError(path, "expected an integer");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) {
          throw ValidationError(path, "expected a boolean");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) {
          throw ValidationError(path, "expected a string");
        }
      }
      return value.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path, e.what());
    }
  }

 private:
  const nlohmann::json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace padg
