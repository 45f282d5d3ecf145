#include "zel/corpus/io.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "zel/common/errors.hpp"
#include "zel/common/jsonl.hpp"

namespace zel::corpus {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json mention_to_json(const Mention& m) {
  return json{{"mention_id", m.mention_id},
              {"world_id", m.world_id},
              {"doc_id", m.doc_id},
              {"span", {m.span_begin, m.span_end}},
              {"mention_string", m.mention_string},
              {"left_context", m.left_context},
              {"right_context", m.right_context},
              {"gold_entity_id", m.gold_entity_id},
              {"category", to_string(m.category)}};
}

Mention mention_from_json(const json& j) {
  Mention m;
  m.mention_id = j.at("mention_id").get<std::string>();
  m.world_id = j.at("world_id").get<std::string>();
  m.doc_id = j.at("doc_id").get<std::string>();
  m.span_begin = j.at("span").at(0).get<std::size_t>();
  m.span_end = j.at("span").at(1).get<std::size_t>();
  m.mention_string = j.at("mention_string").get<std::string>();
  m.left_context = j.at("left_context").get<std::vector<std::string>>();
  m.right_context = j.at("right_context").get<std::vector<std::string>>();
  m.gold_entity_id = j.at("gold_entity_id").get<std::string>();
  m.category = category_from_string(j.at("category").get<std::string>());
  return m;
}

}  // namespace

World load_world(const fs::path& world_dir, LoadReport* report) {
  World world;
  world.world_id = world_dir.filename().string();
  LoadReport local;

  jsonl::ReadStats stats;
  std::unordered_set<std::string> seen_ids;
  for (const auto& j : jsonl::read_file(world_dir / "entities.jsonl", &stats)) {
    Entity e;
    e.entity_id = j.at("entity_id").get<std::string>();
    e.title = j.at("title").get<std::string>();
    e.description = j.value("description", std::string{});
    if (e.title.empty())
      throw ValidationError("entity '" + e.entity_id + "' in world '" + world.world_id +
                            "' has an empty title");
    if (!seen_ids.insert(e.entity_id).second)
      throw ValidationError("duplicate entity_id '" + e.entity_id + "' in world '" +
                            world.world_id + "'");
    if (e.description.empty()) ++local.empty_descriptions;
    world.dictionary.entities.push_back(std::move(e));
  }
  local.malformed_lines += stats.malformed;
  world.dictionary.world_id = world.world_id;
  world.dictionary.rebuild_lookup();

  for (const auto& j : jsonl::read_file(world_dir / "documents.jsonl", &stats)) {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.world_id = world.world_id;
    d.text = j.at("text").get<std::string>();
    for (const auto& link : j.value("hyperlinks", json::array())) {
      d.hyperlinks.push_back(Hyperlink{link.at(0).get<std::size_t>(),
                                       link.at(1).get<std::size_t>(),
                                       link.at(2).get<std::string>()});
    }
    world.documents.push_back(std::move(d));
  }
  local.malformed_lines += stats.malformed;

  if (fs::exists(world_dir / "mentions.jsonl")) {
    for (const auto& j : jsonl::read_file(world_dir / "mentions.jsonl", &stats)) {
      world.mentions.push_back(mention_from_json(j));
    }
    local.malformed_lines += stats.malformed;
  }

  if (local.empty_descriptions > 0) {
    local.warnings.push_back("world '" + world.world_id + "': " +
                             std::to_string(local.empty_descriptions) +
                             " entities have empty descriptions");
  }
  if (report) *report = local;
  return world;
}

void save_world(const World& world, const fs::path& world_dir, bool include_mentions) {
  fs::create_directories(world_dir);

  std::vector<json> entities;
  entities.reserve(world.dictionary.entities.size());
  for (const auto& e : world.dictionary.entities) {
    entities.push_back(json{{"entity_id", e.entity_id},
                            {"title", e.title},
                            {"description", e.description}});
  }
  jsonl::write_file(world_dir / "entities.jsonl", entities);

  std::vector<json> documents;
  documents.reserve(world.documents.size());
  for (const auto& d : world.documents) {
    json links = json::array();
    for (const auto& h : d.hyperlinks) links.push_back({h.begin, h.end, h.entity_id});
    documents.push_back(json{{"doc_id", d.doc_id}, {"text", d.text}, {"hyperlinks", links}});
  }
  jsonl::write_file(world_dir / "documents.jsonl", documents);

  if (include_mentions) {
    std::vector<json> mentions;
    mentions.reserve(world.mentions.size());
    for (const auto& m : world.mentions) mentions.push_back(mention_to_json(m));
    jsonl::write_file(world_dir / "mentions.jsonl", mentions);
  }
}

std::vector<std::string> list_world_ids(const fs::path& root) {
  std::vector<std::string> ids;
  if (!fs::exists(root)) throw MissingArtifactError("corpus root not found: " + root.string());
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "entities.jsonl")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<World> load_worlds(const fs::path& root, LoadReport* report) {
  std::vector<World> worlds;
  LoadReport total;
  for (const auto& id : list_world_ids(root)) {
    LoadReport one;
    worlds.push_back(load_world(root / id, &one));
    total.malformed_lines += one.malformed_lines;
    total.empty_descriptions += one.empty_descriptions;
    total.warnings.insert(total.warnings.end(), one.warnings.begin(), one.warnings.end());
  }
  if (report) *report = total;
  return worlds;
}

void save_splits(const DatasetSplits& splits, const fs::path& path) {
  json worlds = json::object();
  for (const auto& w : splits.train_worlds) worlds[w] = "train";
  for (const auto& w : splits.val_worlds) worlds[w] = "val";
  for (const auto& w : splits.test_worlds) worlds[w] = "test";
  json j{{"worlds", worlds},
         {"heldout_seen", splits.heldout_seen},
         {"heldout_unseen", splits.heldout_unseen}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DatasetSplits load_splits(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("splits manifest not found: " + path.string());
  json j = json::parse(in);
  DatasetSplits s;
  for (const auto& [world, split] : j.at("worlds").items()) {
    switch (split_from_string(split.get<std::string>())) {
      case Split::Train: s.train_worlds.push_back(world); break;
      case Split::Val: s.val_worlds.push_back(world); break;
      case Split::Test: s.test_worlds.push_back(world); break;
    }
  }
  std::sort(s.train_worlds.begin(), s.train_worlds.end());
  std::sort(s.val_worlds.begin(), s.val_worlds.end());
  std::sort(s.test_worlds.begin(), s.test_worlds.end());
  s.heldout_seen = j.at("heldout_seen").get<std::vector<std::string>>();
  s.heldout_unseen = j.at("heldout_unseen").get<std::vector<std::string>>();
  return s;
}

std::pair<std::string, std::string> split_qualified_id(const std::string& qualified) {
  auto slash = qualified.find('/');
  if (slash == std::string::npos)
    throw ValidationError("expected world-qualified id, got '" + qualified + "'");
  return {qualified.substr(0, slash), qualified.substr(slash + 1)};
}

}  // namespace zel::corpus
