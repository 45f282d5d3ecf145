#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zel/corpus/types.hpp"

namespace zel::corpus {

// Seeded synthetic multi-world corpus generator. Emits the same on-disk shape
// as real corpora: entity dictionaries plus documents whose hyperlinks carry
// the mention labels. Mentions are not emitted; corpus construction extracts
// them from the hyperlinks.
//
// The generator plants mention/title patterns per category:
//   high_overlap        mention text equals a plain entity title
//   multiple_categories mention is the title of an entity named "base (x)"
//   ambiguous_substring mention is the shared head token of a title group
//   low_overlap         mention is an alias token that only the description
//                       carries
//
// Entities within a title group share a head token, so ambiguous mentions
// retrieve the whole group and ranking has to rely on context. Each entity
// owns a signature token planted both in its description and (at
// signature_rate) next to its mentions, giving a token-correspondence signal
// that resolves the gold entity. Filler text follows a per-world first-order
// chain over a world-specific token pool, which gives masked-LM training
// something world-specific to learn.
struct WorldSpec {
  std::string world_id = "w0";
  std::size_t n_entities = 48;
  std::size_t group_size = 1;       // entities per shared-head title group
  std::size_t n_docs = 40;
  std::size_t total_mentions = 0;   // 0 -> mentions_per_doc * n_docs
  std::size_t mentions_per_doc = 4;
  std::size_t filler_between = 6;   // filler tokens between planted mentions
  std::string token_prefix = "w0";  // prefix of this world's token pool
  std::size_t pool_size = 120;      // distinct filler tokens
  double shared_fraction = 0.0;     // filler drawn from the cross-world pool
  double bigram_prob = 0.5;         // successor-chain structure in filler
  // Planted category counts. If all zero, fractions are used instead and the
  // remainder after high/multi/ambig is low overlap.
  std::size_t n_high = 0, n_multi = 0, n_ambig = 0, n_low = 0;
  double frac_high = 0.05, frac_multi = 0.28, frac_ambig = 0.08;
  double signature_rate = 1.0;   // chance a mention's context carries the signature
  std::size_t alias_share = 4;   // entities sharing one alias token
  std::size_t desc_filler = 12;  // filler tokens per entity description
  std::size_t dangling_links = 0;  // hyperlinks to ids absent from the dictionary
};

struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t shared_pool_size = 100;
  std::string shared_prefix = "shr";
  std::vector<WorldSpec> worlds;
};

World generate_world(const WorldSpec& spec, std::uint64_t seed,
                     std::size_t shared_pool_size = 100,
                     const std::string& shared_prefix = "shr");

std::vector<World> generate_worlds(const SyntheticSpec& spec);

}  // namespace zel::corpus
