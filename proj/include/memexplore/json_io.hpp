#pragma once

// Small helpers around nlohmann::json shared by every file format.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "memexplore/geometry.hpp"

namespace memexplore::json_io {

using nlohmann::json;

double number(const json& obj, const char* key, std::string_view where,
              std::optional<double> fallback = std::nullopt);
int integer(const json& obj, const char* key, std::string_view where,
            std::optional<int> fallback = std::nullopt);
std::string string(const json& obj, const char* key, std::string_view where,
                   std::optional<std::string> fallback = std::nullopt);
bool boolean(const json& obj, const char* key, std::string_view where,
             std::optional<bool> fallback = std::nullopt);
std::vector<std::string> string_list(const json& arr, std::string_view where);
std::vector<double> number_list(const json& arr, std::string_view where);

json to_json(const Pose& pose);
Pose pose(const json& obj, std::string_view where);

/// Parses one JSON document; throws ParseError with `where` on failure.
json parse(std::string_view text, std::string_view where);

/// Writes to a sibling temp file then renames over the destination.
void write_atomically(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);
/// Non-empty lines of a JSONL file.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace memexplore::json_io
