#include "memexplore/json_io.hpp"

#include <fstream>
#include <sstream>

#include "memexplore/error.hpp"

namespace memexplore::json_io {

namespace {

[[noreturn]] void missing(const char* key, std::string_view where) {
  throw ParseError(std::string(where) + "." + key + ": missing");
}

[[noreturn]] void wrong_type(const char* key, std::string_view where, const char* expected) {
  throw ParseError(std::string(where) + "." + key + ": expected " + expected);
}

}  // namespace

double number(const json& obj, const char* key, std::string_view where,
              std::optional<double> fallback) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (fallback) {
      return *fallback;
    }
    missing(key, where);
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    wrong_type(key, where, "a number");
  }
  return v.get<double>();
}

int integer(const json& obj, const char* key, std::string_view where, std::optional<int> fallback) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (fallback) {
      return *fallback;
    }
    missing(key, where);
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    wrong_type(key, where, "an integer");
  }
  return v.get<int>();
}

std::string string(const json& obj, const char* key, std::string_view where,
                   std::optional<std::string> fallback) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (fallback) {
      return *fallback;
    }
    missing(key, where);
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    wrong_type(key, where, "a string");
  }
  return v.get<std::string>();
}

bool boolean(const json& obj, const char* key, std::string_view where, std::optional<bool> fallback) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (fallback) {
      return *fallback;
    }
    missing(key, where);
  }
  const auto& v = obj.at(key);
  if (!v.is_boolean()) {
    wrong_type(key, where, "a boolean");
  }
  return v.get<bool>();
}

std::vector<std::string> string_list(const json& arr, std::string_view where) {
  if (!arr.is_array()) {
    throw ParseError(std::string(where) + ": expected an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) {
      throw ParseError(std::string(where) + ": expected an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<double> number_list(const json& arr, std::string_view where) {
  if (!arr.is_array()) {
    throw ParseError(std::string(where) + ": expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw ParseError(std::string(where) + ": expected an array of numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

json to_json(const Pose& pose) { return json{{"x", pose.x}, {"y", pose.y}, {"heading", pose.heading}}; }

Pose pose(const json& obj, std::string_view where) {
  if (!obj.is_object()) {
    throw ParseError(std::string(where) + ": expected a pose object");
  }
  Pose p;
  p.x = number(obj, "x", where);
  p.y = number(obj, "y", where);
  p.heading = normalize_heading(number(obj, "heading", where, 0.0));
  return p;
}

json parse(std::string_view text, std::string_view where) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) {
    throw ParseError(std::string(where) + ": not valid JSON");
  }
  return doc;
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw Error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

}  // namespace memexplore::json_io
