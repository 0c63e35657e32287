// Copyright 2026 The lfqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "jsonl.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"

namespace lfqa {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("cannot open '" + path.string() + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_invalid("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw_invalid("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw_invalid("cannot move output into place at '" + path.string() + "'");
  }
}

namespace jsonl {

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw_invalid("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw_invalid(path.string() + ":" + std::to_string(number) + ": malformed record (" +
                    e.what() + ")");
    }
    if (!record.is_object()) {
      throw_invalid(path.string() + ":" + std::to_string(number) +
                    ": malformed record (expected a JSON object)");
    }
    fn(record, number);
  }
}

std::string format_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value cannot be serialised");
  // Shortest round-trip digits in scientific form, then laid out the way
  // Python's repr() does: positional for 1e-4 <= |x| < 1e16.
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  std::string sci(buf, end);
  const auto e_pos = sci.find('e');
  std::string mantissa = sci.substr(0, e_pos);
  const int exponent = std::stoi(sci.substr(e_pos + 1));
  std::string sign;
  if (mantissa.front() == '-') {
    sign = "-";
    mantissa.erase(0, 1);
  }
  std::string digits;
  for (char c : mantissa)
    if (c != '.') digits.push_back(c);

  if (exponent < -4 || exponent >= 16) {
    std::string out = sign + digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    out += exponent < 0 ? "e-" : "e+";
    const int mag = std::abs(exponent);
    if (mag < 10) out += "0";
    out += std::to_string(mag);
    return out;
  }
  std::string out = sign;
  if (exponent < 0) {
    out += "0." + std::string(static_cast<std::size_t>(-exponent - 1), '0') + digits;
  } else {
    const auto int_len = static_cast<std::size_t>(exponent) + 1;
    if (digits.size() <= int_len) {
      out += digits + std::string(int_len - digits.size(), '0') + ".0";
    } else {
      out += digits.substr(0, int_len) + "." + digits.substr(int_len);
    }
  }
  return out;
}

namespace {

void dump_into(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        out += Json(key).dump(-1, ' ', false, Json::error_handler_t::strict);
        out.push_back(':');
        dump_into(item, out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        dump_into(item, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::number_float:
      out += format_double(value.get<double>());
      break;
    default:
      out += value.dump(-1, ' ', false, Json::error_handler_t::strict);
      break;
  }
}

}  // namespace

std::string canonical_dump(const Json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

RecordReader::RecordReader(const Json& record, std::string_view file, std::size_t line)
    : record_(record), file_(file), line_(line) {}

std::string RecordReader::where() const {
  return std::string(file_) + ":" + std::to_string(line_);
}

void RecordReader::fail(const std::string& message) const {
  throw_invalid(where() + ": " + message);
}

bool RecordReader::has(const char* key) const {
  auto it = record_.find(key);
  return it != record_.end() && !it->is_null();
}

const Json& RecordReader::required(const char* key) const {
  auto it = record_.find(key);
  if (it == record_.end() || it->is_null()) fail(std::string("missing field '") + key + "'");
  return *it;
}

std::string RecordReader::required_string(const char* key, bool allow_empty) const {
  const Json& v = required(key);
  if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
  auto s = v.get<std::string>();
  if (!allow_empty && s.empty()) fail(std::string("field '") + key + "' must be non-empty");
  return s;
}

std::optional<std::string> RecordReader::optional_string(const char* key) const {
  if (!has(key)) return std::nullopt;
  const Json& v = record_.at(key);
  if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> RecordReader::string_list(const char* key) const {
  std::vector<std::string> out;
  if (!has(key)) return out;
  const Json& v = record_.at(key);
  if (!v.is_array()) fail(std::string("field '") + key + "' must be a list");
  for (const auto& item : v) {
    if (!item.is_string()) fail(std::string("field '") + key + "' must contain strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

long long RecordReader::required_int(const char* key) const {
  const Json& v = required(key);
  if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
  return v.get<long long>();
}

double RecordReader::required_number(const char* key) const {
  const Json& v = required(key);
  if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace jsonl
}  // namespace lfqa
