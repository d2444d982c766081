#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

namespace ipeval {

// One JSON object per line. Parse errors report the 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Serializes with sorted keys (nlohmann default) and writes atomically,
// so identical rows always produce identical bytes.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

std::string jsonl_dump(const std::vector<nlohmann::json>& rows);

}  // namespace ipeval
