#pragma once

// Strict field access on JSON objects for the document parsers.

#include <cmath>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "conman/error.hpp"

namespace conman::detail {

using nlohmann::json;

inline void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
}

inline void require_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array");
}

inline void allow_keys(const json& j, std::initializer_list<std::string_view> keys,
                       const std::string& where) {
    require_object(j, where);
    for (const auto& [k, _] : j.items()) {
        bool known = false;
        for (auto allowed : keys) known = known || k == allowed;
        if (!known) throw SchemaError(where + ": unknown key \"" + k + "\"");
    }
}

inline const json& field(const json& j, std::string_view key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(where + ": missing key \"" + std::string(key) + "\"");
    return *it;
}

inline std::string get_string(const json& j, std::string_view key, const std::string& where) {
    const auto& v = field(j, key, where);
    if (!v.is_string()) throw SchemaError(where + "." + std::string(key) + ": expected a string");
    return v.get<std::string>();
}

inline double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(where + ": expected a finite number");
    return d;
}

inline double get_double(const json& j, std::string_view key, const std::string& where) {
    return as_double(field(j, key, where), where + "." + std::string(key));
}

inline long long get_int(const json& j, std::string_view key, const std::string& where) {
    const auto& v = field(j, key, where);
    if (!v.is_number_integer())
        throw SchemaError(where + "." + std::string(key) + ": expected an integer");
    return v.get<long long>();
}

inline bool get_bool(const json& j, std::string_view key, const std::string& where) {
    const auto& v = field(j, key, where);
    if (!v.is_boolean()) throw SchemaError(where + "." + std::string(key) + ": expected a boolean");
    return v.get<bool>();
}

template <typename T, typename Parse>
T get_enum(const json& j, std::string_view key, const std::string& where, Parse parse) {
    const std::string s = get_string(j, key, where);
    auto v = parse(s);
    if (!v) throw SchemaError(where + "." + std::string(key) + ": unknown value \"" + s + "\"");
    return *v;
}

}  // namespace conman::detail
