#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zel/common/errors.hpp"

namespace zel::jsonl {

using json = nlohmann::json;

struct ReadStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;  // skipped lines that failed to parse
};

// Reads a line-delimited JSON file. Malformed lines are skipped and counted;
// callers that require clean input can inspect stats.malformed.
inline std::vector<json> read_file(const std::filesystem::path& path,
                                   ReadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open " + path.string());
  std::vector<json> records;
  std::string line;
  ReadStats local;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++local.lines;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      ++local.malformed;
      continue;
    }
    records.push_back(std::move(j));
  }
  if (stats) *stats = local;
  return records;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace zel::jsonl
