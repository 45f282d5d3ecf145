#include "zel/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "zel/common/errors.hpp"
#include "zel/common/rng.hpp"

namespace zel::corpus {

namespace {

enum class Pattern { High, Multi, Ambig, Low };

struct TokenPools {
  std::vector<std::string> filler;
  std::vector<std::string> shared;

  std::string draw_filler(Rng& rng, double shared_fraction, double bigram_prob,
                          std::size_t& chain_pos) {
    if (!shared.empty() && rng.bernoulli(shared_fraction)) {
      return shared[rng.uniform_index(shared.size())];
    }
    if (rng.bernoulli(bigram_prob)) {
      chain_pos = (chain_pos + 7) % filler.size();  // fixed successor map
    } else {
      chain_pos = rng.uniform_index(filler.size());
    }
    return filler[chain_pos];
  }
};

struct DocBuilder {
  std::string text;
  std::vector<Hyperlink> links;

  void append_token(const std::string& tok) {
    if (!text.empty()) text.push_back(' ');
    text += tok;
  }

  // appends tokens and records a hyperlink covering them
  void append_mention(const std::vector<std::string>& tokens, const std::string& entity_id) {
    if (!text.empty()) text.push_back(' ');
    const std::size_t begin = text.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) text.push_back(' ');
      text += tokens[i];
    }
    links.push_back(Hyperlink{begin, text.size(), entity_id});
  }
};

}  // namespace

World generate_world(const WorldSpec& spec, std::uint64_t seed, std::size_t shared_pool_size,
                     const std::string& shared_prefix) {
  if (spec.n_entities == 0) throw ConfigError("synthetic world needs at least one entity");
  if (spec.n_docs == 0) throw ConfigError("synthetic world needs at least one document");
  if (spec.group_size == 0) throw ConfigError("group_size must be >= 1");

  Rng rng(seed);
  const auto& p = spec.token_prefix;

  TokenPools pools;
  pools.filler.reserve(spec.pool_size);
  for (std::size_t i = 0; i < std::max<std::size_t>(1, spec.pool_size); ++i)
    pools.filler.push_back(p + "f" + std::to_string(i));
  for (std::size_t i = 0; i < shared_pool_size; ++i)
    pools.shared.push_back(shared_prefix + "f" + std::to_string(i));

  World world;
  world.world_id = spec.world_id;
  world.dictionary.world_id = spec.world_id;

  // Entities. Odd ordinals get parenthesized titles so both the
  // high-overlap and multiple-categories patterns have hosts.
  const std::size_t n_aliases = std::max<std::size_t>(1, spec.n_entities / std::max<std::size_t>(1, spec.alias_share));
  std::vector<std::string> head_of(spec.n_entities);
  std::vector<std::string> base_title(spec.n_entities);  // title without the paren tail
  std::vector<bool> paren(spec.n_entities);
  std::vector<std::string> sig_of(spec.n_entities), alias_of(spec.n_entities);
  std::size_t desc_chain = 0;
  for (std::size_t i = 0; i < spec.n_entities; ++i) {
    const std::size_t group = i / spec.group_size;
    head_of[i] = p + "g" + std::to_string(group);
    const std::string suffix = p + "t" + std::to_string(i);
    base_title[i] = head_of[i] + " " + suffix;
    paren[i] = (i % 2 == 1);
    sig_of[i] = p + "s" + std::to_string(i);
    alias_of[i] = p + "a" + std::to_string(i % n_aliases);

    Entity e;
    e.entity_id = "e" + std::to_string(i);
    e.title = paren[i] ? base_title[i] + " (x)" : base_title[i];
    std::string desc = suffix + " " + head_of[i] + " " + sig_of[i] + " " + alias_of[i];
    for (std::size_t t = 0; t < spec.desc_filler; ++t) {
      desc += " " + pools.draw_filler(rng, spec.shared_fraction, spec.bigram_prob, desc_chain);
    }
    e.description = desc;
    world.dictionary.entities.push_back(std::move(e));
  }
  world.dictionary.rebuild_lookup();

  std::vector<std::size_t> plain_entities, paren_entities;
  for (std::size_t i = 0; i < spec.n_entities; ++i)
    (paren[i] ? paren_entities : plain_entities).push_back(i);

  // Planted category sequence over all mentions.
  const std::size_t total = spec.total_mentions > 0 ? spec.total_mentions
                                                    : spec.n_docs * spec.mentions_per_doc;
  std::size_t n_high = spec.n_high, n_multi = spec.n_multi, n_ambig = spec.n_ambig,
              n_low = spec.n_low;
  if (n_high + n_multi + n_ambig + n_low == 0) {
    n_high = static_cast<std::size_t>(std::llround(spec.frac_high * static_cast<double>(total)));
    n_multi = static_cast<std::size_t>(std::llround(spec.frac_multi * static_cast<double>(total)));
    n_ambig = static_cast<std::size_t>(std::llround(spec.frac_ambig * static_cast<double>(total)));
    const std::size_t planted = n_high + n_multi + n_ambig;
    n_low = planted > total ? 0 : total - planted;
  }
  if (n_high + n_multi + n_ambig + n_low != total)
    throw ConfigError("planted category counts must sum to the total mention count");
  if (n_high > 0 && plain_entities.empty())
    throw ConfigError("high-overlap mentions need at least one plain-titled entity");
  if (n_multi > 0 && paren_entities.empty())
    throw ConfigError("multiple-categories mentions need at least one parenthesized title");

  std::vector<Pattern> patterns;
  patterns.insert(patterns.end(), n_high, Pattern::High);
  patterns.insert(patterns.end(), n_multi, Pattern::Multi);
  patterns.insert(patterns.end(), n_ambig, Pattern::Ambig);
  patterns.insert(patterns.end(), n_low, Pattern::Low);
  rng.shuffle(patterns);

  // Spread mentions (and dangling links) round-robin across documents.
  std::vector<std::size_t> mentions_in_doc(spec.n_docs, 0);
  for (std::size_t i = 0; i < total; ++i) ++mentions_in_doc[i % spec.n_docs];
  std::vector<std::size_t> dangling_in_doc(spec.n_docs, 0);
  for (std::size_t i = 0; i < spec.dangling_links; ++i) ++dangling_in_doc[i % spec.n_docs];

  std::size_t pattern_pos = 0;
  std::size_t dangle_id = 0;
  std::size_t chain = 0;
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    DocBuilder builder;
    auto filler = [&](std::size_t count) {
      for (std::size_t i = 0; i < count; ++i)
        builder.append_token(pools.draw_filler(rng, spec.shared_fraction, spec.bigram_prob, chain));
    };

    filler(spec.filler_between);
    for (std::size_t m = 0; m < mentions_in_doc[d]; ++m) {
      const Pattern pat = patterns[pattern_pos++];
      std::size_t entity = 0;
      std::vector<std::string> mention_tokens;
      switch (pat) {
        case Pattern::High:
          entity = plain_entities[rng.uniform_index(plain_entities.size())];
          mention_tokens = {head_of[entity], p + "t" + std::to_string(entity)};
          break;
        case Pattern::Multi:
          entity = paren_entities[rng.uniform_index(paren_entities.size())];
          mention_tokens = {head_of[entity], p + "t" + std::to_string(entity)};
          break;
        case Pattern::Ambig:
          entity = rng.uniform_index(spec.n_entities);
          mention_tokens = {head_of[entity]};
          break;
        case Pattern::Low:
          entity = rng.uniform_index(spec.n_entities);
          mention_tokens = {alias_of[entity]};
          break;
      }
      builder.append_mention(mention_tokens,
                             world.dictionary.entities[entity].entity_id);
      filler(1);
      if (rng.bernoulli(spec.signature_rate)) builder.append_token(sig_of[entity]);
      filler(spec.filler_between);
    }
    for (std::size_t i = 0; i < dangling_in_doc[d]; ++i) {
      builder.append_mention({p + "dangle"}, "absent" + std::to_string(dangle_id++));
      filler(spec.filler_between);
    }

    Document doc;
    doc.doc_id = spec.world_id + "_d" + std::to_string(d);
    doc.world_id = spec.world_id;
    doc.text = std::move(builder.text);
    doc.hyperlinks = std::move(builder.links);
    world.documents.push_back(std::move(doc));
  }
  return world;
}

std::vector<World> generate_worlds(const SyntheticSpec& spec) {
  std::vector<World> worlds;
  Rng master(spec.seed);
  for (const auto& w : spec.worlds) {
    const std::uint64_t world_seed = master.next_u64();
    worlds.push_back(generate_world(w, world_seed, spec.shared_pool_size, spec.shared_prefix));
  }
  return worlds;
}

}  // namespace zel::corpus
