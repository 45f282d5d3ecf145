#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zel/corpus/types.hpp"

namespace zel::corpus {

struct LoadReport {
  std::size_t malformed_lines = 0;
  std::size_t empty_descriptions = 0;
  std::vector<std::string> warnings;
};

// Worlds live in <root>/<world_id>/{entities,documents,mentions}.jsonl.
// mentions.jsonl is optional (absent until corpus construction has run).
World load_world(const std::filesystem::path& world_dir, LoadReport* report = nullptr);
void save_world(const World& world, const std::filesystem::path& world_dir,
                bool include_mentions = true);

// Every subdirectory of root containing an entities.jsonl, sorted by name.
std::vector<std::string> list_world_ids(const std::filesystem::path& root);

std::vector<World> load_worlds(const std::filesystem::path& root, LoadReport* report = nullptr);

void save_splits(const DatasetSplits& splits, const std::filesystem::path& path);
DatasetSplits load_splits(const std::filesystem::path& path);

// "world_id/mention_id" -> (world_id, mention_id)
std::pair<std::string, std::string> split_qualified_id(const std::string& qualified);

}  // namespace zel::corpus
