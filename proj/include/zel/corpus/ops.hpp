#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/index/tokenizer.hpp"

namespace zel::corpus {

// Token-overlap taxonomy between a mention string and its gold entity title.
// Rules are tried in order: identical -> title is mention plus a parenthesized
// disambiguation phrase -> mention is a word-bounded substring of title ->
// everything else. Matching is case-folded with whitespace normalized.
MentionCategory categorize_mention(const std::string& mention_string,
                                   const std::string& entity_title);

struct ExtractResult {
  std::vector<Mention> mentions;
  std::size_t unresolved_links = 0;  // hyperlink target not in the dictionary
  std::size_t rejected_spans = 0;    // span out of bounds or empty after tokenization
};

// One Mention per resolvable hyperlink. Contexts are the nearest
// context_window tokens on each side of the span. Unresolvable links are
// skipped and counted; malformed spans are rejected and counted.
ExtractResult extract_mentions(const Document& document, const EntityDictionary& dictionary,
                               std::size_t context_window,
                               const index::TokenizerConfig& cfg = {.lowercase = false});

// Whether a mention counts as "easy": case-folded exact match between the
// mention string and the gold entity's title.
bool is_easy_mention(const Mention& mention, const EntityDictionary& dictionary);

// Subsamples easy mentions so they make up approximately target_fraction of
// the result. Non-easy mentions are always retained, relative order is
// preserved, and the subsample is deterministic for a given seed.
std::vector<Mention> downsample_easy(const std::vector<Mention>& mentions,
                                     const EntityDictionary& dictionary, double target_fraction,
                                     std::uint64_t rng_seed);

std::map<MentionCategory, double> category_proportions(const std::vector<Mention>& mentions);

struct BuildSplitsResult {
  DatasetSplits splits;
  std::vector<std::string> warnings;
};

// Assigns worlds to train/val/test and draws the seen/unseen heldout sets from
// train-world mentions. "Seen" heldout mentions link to entities that remain
// gold for at least one training mention; "unseen" ones link to entities that
// never appear as gold in training. Heldout mentions are excluded from the
// training set. When a requested size is infeasible the maximum available is
// used and a warning is recorded.
BuildSplitsResult build_splits(const std::vector<World>& worlds,
                               const std::map<std::string, Split>& assignment,
                               std::size_t heldout_size, std::uint64_t rng_seed);

// Training mentions of the train worlds after heldout exclusion.
std::vector<const Mention*> training_mentions(const std::vector<World>& worlds,
                                              const DatasetSplits& splits);

}  // namespace zel::corpus
