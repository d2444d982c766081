#include "ipeval/jsonl.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ipeval/util.hpp"

namespace ipeval {

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::vector<nlohmann::json> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": invalid JSON line: " + e.what());
    }
  }
  return rows;
}

std::string jsonl_dump(const std::vector<nlohmann::json>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << row.dump() << '\n';
  }
  return out.str();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows) {
  atomic_write_file(path, jsonl_dump(rows));
}

}  // namespace ipeval
