#include "json_util.hpp"

#include <algorithm>

namespace memsched::detail {

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  byte = std::min(byte, text.size());
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

} // namespace

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    auto [line, column] = line_column(text, e.byte);
    throw SyntaxError("line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what(),
                      line, column);
  }
}

void schema_error(const std::string &path, const std::string &msg) {
  throw SyntaxError(path + ": " + msg, 0, 0);
}

void expect_keys(const json &obj, const std::string &path,
                 std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object())
    schema_error(path, "expected an object");
  for (const auto &item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      schema_error(path, "unknown key \"" + item.key() + "\"");
  }
}

const json &require(const json &obj, const std::string &path,
                    std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end())
    schema_error(path, "missing key \"" + std::string(key) + "\"");
  return *it;
}

std::string get_string(const json &v, const std::string &path) {
  if (!v.is_string())
    schema_error(path, "expected a string");
  return v.get<std::string>();
}

long long get_int(const json &v, const std::string &path) {
  if (!v.is_number_integer())
    schema_error(path, "expected an integer");
  return v.get<long long>();
}

double get_number(const json &v, const std::string &path) {
  if (!v.is_number())
    schema_error(path, "expected a number");
  return v.get<double>();
}

const json &get_array(const json &v, const std::string &path) {
  if (!v.is_array())
    schema_error(path, "expected an array");
  return v;
}

} // namespace memsched::detail
