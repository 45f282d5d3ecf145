#include "zel/ranker/train.hpp"

namespace zel::ranker {

std::vector<TrainExample> make_examples(
    const std::vector<const corpus::Mention*>& mentions,
    const std::unordered_map<std::string, const index::CandidateSet*>& candidates_by_mention,
    const corpus::EntityDictionary& dictionary, bool force_gold, ExampleBuildStats* stats) {
  ExampleBuildStats local;
  std::vector<TrainExample> examples;
  for (const auto* mention : mentions) {
    auto it = candidates_by_mention.find(mention->mention_id);
    if (it == candidates_by_mention.end() || it->second->candidates.empty()) {
      ++local.skipped_no_candidates;
      continue;
    }
    const auto& cs = *it->second;

    TrainExample ex;
    ex.mention = mention;
    long gold_at = -1;
    for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
      const long ord = dictionary.find(cs.candidates[i].first);
      if (ord < 0) continue;  // candidate from another dictionary version
      ex.candidates.push_back(&dictionary.entities[static_cast<std::size_t>(ord)]);
      if (cs.candidates[i].first == mention->gold_entity_id)
        gold_at = static_cast<long>(ex.candidates.size()) - 1;
    }
    if (gold_at < 0) {
      if (!force_gold) {
        ++local.skipped_gold_missing;
        continue;
      }
      const long ord = dictionary.find(mention->gold_entity_id);
      if (ord < 0) {
        ++local.skipped_gold_missing;
        continue;
      }
      const auto* gold = &dictionary.entities[static_cast<std::size_t>(ord)];
      if (ex.candidates.empty()) {
        ex.candidates.push_back(gold);
      } else {
        ex.candidates.back() = gold;  // replace the weakest candidate
      }
      gold_at = static_cast<long>(ex.candidates.size()) - 1;
    }
    ex.gold_index = static_cast<std::size_t>(gold_at);
    examples.push_back(std::move(ex));
    ++local.usable;
  }
  if (stats) *stats = local;
  return examples;
}

}  // namespace zel::ranker
