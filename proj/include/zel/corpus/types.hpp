#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace zel::corpus {

struct Entity {
  std::string entity_id;  // unique within its world
  std::string title;      // non-empty
  std::string description;
};

struct EntityDictionary {
  std::string world_id;
  std::vector<Entity> entities;

  std::size_t size() const { return entities.size(); }

  // ordinal of an entity_id, or -1 when absent
  long find(const std::string& entity_id) const {
    auto it = by_id_.find(entity_id);
    return it == by_id_.end() ? -1 : static_cast<long>(it->second);
  }

  void rebuild_lookup() {
    by_id_.clear();
    for (std::size_t i = 0; i < entities.size(); ++i) by_id_[entities[i].entity_id] = i;
  }

 private:
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct Hyperlink {
  std::size_t begin = 0;  // byte offsets into Document::text
  std::size_t end = 0;
  std::string entity_id;
};

struct Document {
  std::string doc_id;
  std::string world_id;
  std::string text;
  std::vector<Hyperlink> hyperlinks;
};

enum class MentionCategory { HighOverlap, MultipleCategories, AmbiguousSubstring, LowOverlap };

const char* to_string(MentionCategory c);
MentionCategory category_from_string(const std::string& s);

struct Mention {
  std::string mention_id;
  std::string world_id;
  std::string doc_id;
  std::size_t span_begin = 0;  // token index range within the document
  std::size_t span_end = 0;
  std::string mention_string;
  std::vector<std::string> left_context;
  std::vector<std::string> right_context;
  std::string gold_entity_id;
  MentionCategory category = MentionCategory::LowOverlap;
};

struct World {
  std::string world_id;
  std::vector<Document> documents;
  EntityDictionary dictionary;
  std::vector<Mention> mentions;
};

enum class Split { Train, Val, Test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct DatasetSplits {
  std::vector<std::string> train_worlds;
  std::vector<std::string> val_worlds;
  std::vector<std::string> test_worlds;
  std::vector<std::string> heldout_seen;    // mention_ids from train worlds
  std::vector<std::string> heldout_unseen;  // mention_ids from train worlds
};

}  // namespace zel::corpus
