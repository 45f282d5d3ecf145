#include "zel/ranker/packing.hpp"

#include <algorithm>

#include "zel/index/tokenizer.hpp"

namespace zel::ranker {

namespace {

// Splits a stored token again under the neural tokenizer config. Corpus
// tokens keep original case and may fold to nothing under min_token_len.
void append_token_ids(const std::string& token, const Vocab& vocab,
                      std::vector<std::size_t>& out) {
  for (const auto& piece : index::tokenize(token, vocab.tokenizer())) {
    out.push_back(vocab.id(piece));
  }
}

}  // namespace

MentionWindow mention_window(const corpus::Mention& mention, const Vocab& vocab,
                             std::size_t max_segment_len) {
  std::vector<std::size_t> span_ids;
  append_token_ids(mention.mention_string, vocab, span_ids);

  MentionWindow window;
  if (span_ids.empty()) window.empty_mention = true;

  if (span_ids.size() >= max_segment_len) {
    span_ids.resize(max_segment_len);
    window.ids = std::move(span_ids);
    window.flags.assign(window.ids.size(), 1);
    return window;
  }

  std::vector<std::size_t> left_ids, right_ids;
  for (const auto& t : mention.left_context) append_token_ids(t, vocab, left_ids);
  for (const auto& t : mention.right_context) append_token_ids(t, vocab, right_ids);

  const std::size_t budget = max_segment_len - span_ids.size();
  const std::size_t want_left = budget / 2;
  const std::size_t want_right = budget - want_left;
  // balanced split; leftover budget shifts to the other side at document edges
  std::size_t take_left =
      std::min(left_ids.size(),
               want_left + (want_right > right_ids.size() ? want_right - right_ids.size() : 0));
  std::size_t take_right = std::min(right_ids.size(), budget - take_left);

  window.ids.assign(left_ids.end() - static_cast<std::ptrdiff_t>(take_left), left_ids.end());
  window.flags.assign(take_left, 0);
  for (auto id : span_ids) {
    window.ids.push_back(id);
    window.flags.push_back(window.empty_mention ? 0 : 1);
  }
  window.ids.insert(window.ids.end(), right_ids.begin(),
                    right_ids.begin() + static_cast<std::ptrdiff_t>(take_right));
  window.flags.resize(window.ids.size(), 0);
  return window;
}

std::vector<std::size_t> entity_tokens(const corpus::Entity& entity, const Vocab& vocab,
                                       std::size_t max_segment_len) {
  std::vector<std::size_t> ids;
  append_token_ids(entity.title, vocab, ids);
  if (!entity.description.empty()) {
    ids.push_back(Vocab::kSep);
    append_token_ids(entity.description, vocab, ids);
  }
  if (ids.size() > max_segment_len) ids.resize(max_segment_len);
  return ids;
}

namespace {

PackedPair assemble(const std::vector<std::size_t>& mention_ids,
                    const std::vector<std::uint8_t>& mention_flags,
                    const std::vector<std::size_t>* entity_ids, std::size_t template_len,
                    bool empty_mention) {
  PackedPair packed;
  packed.empty_mention = empty_mention;
  auto push = [&](std::size_t id, std::size_t segment, std::uint8_t flag) {
    packed.token_ids.push_back(id);
    packed.segment_ids.push_back(segment);
    packed.mention_flags.push_back(flag);
    packed.attention_mask.push_back(1);
  };

  push(Vocab::kCls, 0, 0);
  for (std::size_t i = 0; i < mention_ids.size(); ++i) push(mention_ids[i], 0, mention_flags[i]);
  push(Vocab::kSep, 0, 0);
  if (entity_ids) {
    for (auto id : *entity_ids) push(id, 1, 0);
    push(Vocab::kSep, 1, 0);
  }
  while (packed.token_ids.size() < template_len) {
    packed.token_ids.push_back(Vocab::kPad);
    packed.segment_ids.push_back(0);
    packed.mention_flags.push_back(0);
    packed.attention_mask.push_back(0);
  }
  return packed;
}

}  // namespace

PackedPair pack_full(const corpus::Mention& mention, const corpus::Entity& entity,
                     const Vocab& vocab, std::size_t max_segment_len) {
  auto window = mention_window(mention, vocab, max_segment_len);
  auto eids = entity_tokens(entity, vocab, max_segment_len);
  return assemble(window.ids, window.flags, &eids, 2 * max_segment_len + 3,
                  window.empty_mention);
}

PackedPair pack_mention_single(const corpus::Mention& mention, const Vocab& vocab,
                               std::size_t max_segment_len) {
  auto window = mention_window(mention, vocab, max_segment_len);
  return assemble(window.ids, window.flags, nullptr, max_segment_len + 2, window.empty_mention);
}

PackedPair pack_entity_single(const corpus::Entity& entity, const Vocab& vocab,
                              std::size_t max_segment_len) {
  auto eids = entity_tokens(entity, vocab, max_segment_len);
  const std::vector<std::uint8_t> no_flags(eids.size(), 0);
  return assemble(eids, no_flags, nullptr, max_segment_len + 2, false);
}

}  // namespace zel::ranker
