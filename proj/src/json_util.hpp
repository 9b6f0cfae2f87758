#pragma once

// Shared helpers for the JSON document readers.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "memsched/error.hpp"

namespace memsched::detail {

using json = nlohmann::json;

json parse_json(std::string_view text);

[[noreturn]] void schema_error(const std::string &path, const std::string &msg);

/// Rejects keys outside `allowed` and requires an object.
void expect_keys(const json &obj, const std::string &path,
                 std::initializer_list<std::string_view> allowed);

const json &require(const json &obj, const std::string &path,
                    std::string_view key);
std::string get_string(const json &v, const std::string &path);
long long get_int(const json &v, const std::string &path);
double get_number(const json &v, const std::string &path);
const json &get_array(const json &v, const std::string &path);

} // namespace memsched::detail
