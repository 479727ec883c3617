#include "stfe/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stfe::toml {

double Value::as_number() const {
  if (type == Type::Float) return num;
  if (type == Type::Integer) return static_cast<double>(integer);
  throw ParseError("value is not numeric");
}

std::int64_t Value::as_integer() const {
  if (type == Type::Integer) return integer;
  if (type == Type::Float && num == static_cast<std::int64_t>(num))
    return static_cast<std::int64_t>(num);
  throw ParseError("value is not an integer");
}

const Value* Document::find(const std::string& table,
                            const std::string& key) const {
  const auto t = tables.find(table);
  if (t == tables.end()) return nullptr;
  const auto k = t->second.find(key);
  return k == t->second.end() ? nullptr : &k->second;
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// removes a trailing comment that is not inside a string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

double parse_number(const std::string& tok, int line) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  if (used != tok.size())
    throw ParseError("line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

Value parse_value(const std::string& raw, int line) {
  Value v;
  if (raw.empty())
    throw ParseError("line " + std::to_string(line) + ": missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ParseError("line " + std::to_string(line) + ": unterminated string");
    v.type = Value::Type::String;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.type = Value::Type::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']')
      throw ParseError("line " + std::to_string(line) + ": unterminated array");
    v.type = Value::Type::Array;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (item.empty()) continue;
      v.array.push_back(parse_number(item, line));
    }
    return v;
  }
  // integer if it looks like one, float otherwise
  const bool integral =
      raw.find_first_of(".eE") == std::string::npos &&
      raw.find_first_not_of("+-0123456789") == std::string::npos;
  if (integral) {
    try {
      v.type = Value::Type::Integer;
      v.integer = std::stoll(raw);
      return v;
    } catch (const std::exception&) {
      // fall through to float parsing for out-of-range literals
    }
  }
  v.type = Value::Type::Float;
  v.num = parse_number(raw, line);
  return v;
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  std::string table;
  doc.tables[table];  // root
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("line " + std::to_string(lineno) + ": bad table header");
      table = strip(line.substr(1, line.size() - 2));
      if (!valid_key(table))
        throw ParseError("line " + std::to_string(lineno) + ": bad table name");
      if (doc.tables.count(table))
        throw ParseError("line " + std::to_string(lineno) + ": duplicate table [" +
                         table + "]");
      doc.tables[table];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    if (!valid_key(key) || key.find('.') != std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": bad key '" + key + "'");
    if (doc.tables[table].count(key))
      throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" +
                       key + "'");
    doc.tables[table][key] = parse_value(strip(line.substr(eq + 1)), lineno);
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse(buf.str());
}

}  // namespace stfe::toml
