#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stfe::toml {

// Minimal strict TOML subset for flat config files: [table.sub] headers,
// bare keys, and string / float / integer / boolean / numeric-array values.
// Anything else is a parse error; schema validation happens downstream.
struct Value {
  enum class Type { String, Float, Integer, Boolean, Array };
  Type type = Type::Float;
  std::string str;
  double num = 0;
  std::int64_t integer = 0;
  bool boolean = false;
  std::vector<double> array;

  double as_number() const;
  std::int64_t as_integer() const;
};

struct Document {
  // table path ("" for root) -> key -> value
  std::map<std::string, std::map<std::string, Value>> tables;

  bool has_table(const std::string& table) const {
    return tables.count(table) != 0;
  }
  const Value* find(const std::string& table, const std::string& key) const;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Document parse(const std::string& text);
Document parse_file(const std::string& path);

}  // namespace stfe::toml
