#include "zel/corpus/ops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "zel/common/errors.hpp"
#include "zel/common/rng.hpp"

namespace zel::corpus {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

// needle occurs in hay with non-word characters (or string edges) on both sides
bool word_bounded_substring(const std::string& needle, const std::string& hay) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  std::size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(hay[pos - 1]));
    const std::size_t after = pos + needle.size();
    const bool right_ok =
        after == hay.size() || !is_word_char(static_cast<unsigned char>(hay[after]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::string join_tokens(const std::vector<index::TokenSpan>& tokens, std::size_t begin,
                        std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i].text;
  }
  return out;
}

}  // namespace

MentionCategory categorize_mention(const std::string& mention_string,
                                   const std::string& entity_title) {
  const std::string m = index::fold_case(mention_string);
  const std::string t = index::fold_case(entity_title);
  if (m == t) return MentionCategory::HighOverlap;
  // title == mention + " (" + phrase + ")"
  if (t.size() >= m.size() + 3 && t.compare(0, m.size(), m) == 0 &&
      t.compare(m.size(), 2, " (") == 0 && t.back() == ')') {
    return MentionCategory::MultipleCategories;
  }
  if (word_bounded_substring(m, t)) return MentionCategory::AmbiguousSubstring;
  return MentionCategory::LowOverlap;
}

ExtractResult extract_mentions(const Document& document, const EntityDictionary& dictionary,
                               std::size_t context_window, const index::TokenizerConfig& cfg) {
  ExtractResult result;
  const auto tokens = index::tokenize_spans(document.text, cfg);
  const std::size_t n = tokens.size();

  for (const auto& link : document.hyperlinks) {
    if (link.begin >= link.end || link.end > document.text.size()) {
      ++result.rejected_spans;
      continue;
    }
    const long ordinal = dictionary.find(link.entity_id);
    if (ordinal < 0) {
      ++result.unresolved_links;
      continue;
    }
    // tokens overlapping the hyperlink's byte span
    std::size_t sb = 0;
    while (sb < n && tokens[sb].end <= link.begin) ++sb;
    std::size_t se = sb;
    while (se < n && tokens[se].begin < link.end) ++se;
    if (sb == se) {  // span covers no token (punctuation-only)
      ++result.rejected_spans;
      continue;
    }

    Mention m;
    m.mention_id = document.doc_id + ":" + std::to_string(link.begin);
    m.world_id = document.world_id;
    m.doc_id = document.doc_id;
    m.span_begin = sb;
    m.span_end = se;
    m.mention_string = join_tokens(tokens, sb, se);
    const std::size_t lb = sb > context_window ? sb - context_window : 0;
    for (std::size_t i = lb; i < sb; ++i) m.left_context.push_back(tokens[i].text);
    const std::size_t re = std::min(n, se + context_window);
    for (std::size_t i = se; i < re; ++i) m.right_context.push_back(tokens[i].text);
    m.gold_entity_id = link.entity_id;
    m.category = categorize_mention(
        m.mention_string, dictionary.entities[static_cast<std::size_t>(ordinal)].title);
    result.mentions.push_back(std::move(m));
  }
  return result;
}

bool is_easy_mention(const Mention& mention, const EntityDictionary& dictionary) {
  const long ordinal = dictionary.find(mention.gold_entity_id);
  if (ordinal < 0) return false;
  return index::fold_case(mention.mention_string) ==
         index::fold_case(dictionary.entities[static_cast<std::size_t>(ordinal)].title);
}

std::vector<Mention> downsample_easy(const std::vector<Mention>& mentions,
                                     const EntityDictionary& dictionary, double target_fraction,
                                     std::uint64_t rng_seed) {
  if (target_fraction < 0.0 || target_fraction > 1.0)
    throw ConfigError("downsample_easy: target_fraction must be in [0, 1]");

  std::vector<std::size_t> easy;
  std::size_t non_easy = 0;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (is_easy_mention(mentions[i], dictionary)) {
      easy.push_back(i);
    } else {
      ++non_easy;
    }
  }
  if (easy.empty()) return mentions;

  std::size_t keep;
  if (target_fraction >= 1.0) {
    keep = easy.size();
  } else {
    // solve e / (non_easy + e) = f
    const double implied = target_fraction * static_cast<double>(non_easy) / (1.0 - target_fraction);
    keep = std::min<std::size_t>(easy.size(),
                                 static_cast<std::size_t>(std::llround(implied)));
  }

  Rng rng(rng_seed);
  rng.shuffle(easy);
  std::unordered_set<std::size_t> selected(easy.begin(), easy.begin() + static_cast<long>(keep));

  std::vector<Mention> out;
  out.reserve(non_easy + keep);
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (!is_easy_mention(mentions[i], dictionary) || selected.count(i)) out.push_back(mentions[i]);
  }
  return out;
}

std::map<MentionCategory, double> category_proportions(const std::vector<Mention>& mentions) {
  if (mentions.empty())
    throw ValidationError("category_proportions: empty mention list");
  std::map<MentionCategory, double> out{{MentionCategory::HighOverlap, 0.0},
                                        {MentionCategory::MultipleCategories, 0.0},
                                        {MentionCategory::AmbiguousSubstring, 0.0},
                                        {MentionCategory::LowOverlap, 0.0}};
  for (const auto& m : mentions) out[m.category] += 1.0;
  for (auto& [cat, v] : out) v /= static_cast<double>(mentions.size());
  return out;
}

BuildSplitsResult build_splits(const std::vector<World>& worlds,
                               const std::map<std::string, Split>& assignment,
                               std::size_t heldout_size, std::uint64_t rng_seed) {
  BuildSplitsResult result;
  auto& splits = result.splits;

  for (const auto& w : worlds) {
    auto it = assignment.find(w.world_id);
    if (it == assignment.end())
      throw ConfigError("build_splits: world '" + w.world_id + "' has no split assignment");
    switch (it->second) {
      case Split::Train: splits.train_worlds.push_back(w.world_id); break;
      case Split::Val: splits.val_worlds.push_back(w.world_id); break;
      case Split::Test: splits.test_worlds.push_back(w.world_id); break;
    }
  }

  // All train-world mentions, keyed by world-qualified gold entity.
  struct Ref {
    const Mention* mention;
    std::string qualified_id;    // world_id/mention_id
    std::string gold_key;        // world_id/entity_id
  };
  std::vector<Ref> pool;
  for (const auto& w : worlds) {
    if (assignment.at(w.world_id) != Split::Train) continue;
    for (const auto& m : w.mentions) {
      pool.push_back(Ref{&m, w.world_id + "/" + m.mention_id, w.world_id + "/" + m.gold_entity_id});
    }
  }

  // Unseen heldout: move whole gold-entity groups out of training so their
  // entities never appear as training golds.
  std::vector<std::string> entity_order;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(pool[i].gold_key);
    if (inserted) entity_order.push_back(pool[i].gold_key);
    it->second.push_back(i);
  }

  Rng rng(rng_seed);
  Rng unseen_rng = rng.fork(1);
  Rng seen_rng = rng.fork(2);

  unseen_rng.shuffle(entity_order);
  std::unordered_set<std::size_t> in_unseen;
  for (const auto& key : entity_order) {
    const auto& members = groups.at(key);
    if (in_unseen.size() + members.size() > heldout_size) continue;
    for (auto i : members) in_unseen.insert(i);
    if (in_unseen.size() == heldout_size) break;
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (in_unseen.count(i)) splits.heldout_unseen.push_back(pool[i].qualified_id);
  }
  if (splits.heldout_unseen.size() < heldout_size) {
    result.warnings.push_back("heldout_unseen: requested " + std::to_string(heldout_size) +
                              ", only " + std::to_string(splits.heldout_unseen.size()) +
                              " available without removing entities from training");
  }

  // Seen heldout: sample mentions whose gold entity still has at least one
  // other mention left in training.
  std::unordered_map<std::string, std::size_t> remaining;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (in_unseen.count(i)) continue;
    ++remaining[pool[i].gold_key];
    candidates.push_back(i);
  }
  seen_rng.shuffle(candidates);
  std::vector<std::size_t> in_seen;
  for (auto i : candidates) {
    if (in_seen.size() >= heldout_size) break;
    auto& left = remaining[pool[i].gold_key];
    if (left < 2) continue;
    --left;
    in_seen.push_back(i);
  }
  std::sort(in_seen.begin(), in_seen.end());
  for (auto i : in_seen) splits.heldout_seen.push_back(pool[i].qualified_id);
  if (splits.heldout_seen.size() < heldout_size) {
    result.warnings.push_back("heldout_seen: requested " + std::to_string(heldout_size) +
                              ", only " + std::to_string(splits.heldout_seen.size()) +
                              " available");
  }
  return result;
}

std::vector<const Mention*> training_mentions(const std::vector<World>& worlds,
                                              const DatasetSplits& splits) {
  std::unordered_set<std::string> train_ids(splits.train_worlds.begin(),
                                            splits.train_worlds.end());
  std::unordered_set<std::string> excluded;
  for (const auto& id : splits.heldout_seen) excluded.insert(id);
  for (const auto& id : splits.heldout_unseen) excluded.insert(id);

  std::vector<const Mention*> out;
  for (const auto& w : worlds) {
    if (!train_ids.count(w.world_id)) continue;
    for (const auto& m : w.mentions) {
      if (!excluded.count(w.world_id + "/" + m.mention_id)) out.push_back(&m);
    }
  }
  return out;
}

}  // namespace zel::corpus
