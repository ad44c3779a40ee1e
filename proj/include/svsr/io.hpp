#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace svsr {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& rows);

bool file_exists(const std::string& path);

} // namespace svsr
