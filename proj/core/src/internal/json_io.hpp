#pragma once

// Private helpers shared by the JSON readers. Not installed.

#include <string>

#include <json.hpp>

#include "quadlab/errors.hpp"
#include "quadlab/rates.hpp"

namespace quadlab::internal {

using nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(join_path(path, key), "missing required field");
    }
    return *it;
}

inline double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ConfigError(path, "expected a number");
    }
    return v.get<double>();
}

inline long get_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw ConfigError(path, "expected an integer");
    }
    return v.get<long>();
}

inline std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        throw ConfigError(path, "expected a string");
    }
    return v.get<std::string>();
}

RateSequence rate_from_json_value(const json& v, const std::string& path);
json rate_to_json_value(const RateSequence& rate);

}  // namespace quadlab::internal
