#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/ranker/vocab.hpp"

namespace zel::ranker {

// Fixed-length model input. For the joint architecture the layout is
// [CLS] mention-in-context [SEP] entity [SEP] padded to 2*max_segment_len+3;
// the per-tower layout is [CLS] side [SEP] padded to max_segment_len+2.
// mention_flags are 1 exactly on the mention's own tokens.
struct PackedPair {
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> segment_ids;      // 0 mention side, 1 entity side
  std::vector<std::uint8_t> mention_flags;
  std::vector<std::uint8_t> attention_mask;  // 0 on padding
  bool empty_mention = false;                // span vanished under the neural tokenizer

  std::size_t length() const { return token_ids.size(); }
  std::size_t real_length() const {
    std::size_t n = 0;
    for (auto m : attention_mask) n += m;
    return n;
  }
};

// Mention-side token window: the span centered between its contexts, balanced
// left/right and shifted at document edges, at most max_segment_len tokens.
// Flags mark the span tokens within the window.
struct MentionWindow {
  std::vector<std::size_t> ids;
  std::vector<std::uint8_t> flags;
  bool empty_mention = false;
};

MentionWindow mention_window(const corpus::Mention& mention, const Vocab& vocab,
                             std::size_t max_segment_len);

// Entity-side tokens: title, separator, description, truncated to
// max_segment_len.
std::vector<std::size_t> entity_tokens(const corpus::Entity& entity, const Vocab& vocab,
                                       std::size_t max_segment_len);

PackedPair pack_full(const corpus::Mention& mention, const corpus::Entity& entity,
                     const Vocab& vocab, std::size_t max_segment_len);

PackedPair pack_mention_single(const corpus::Mention& mention, const Vocab& vocab,
                               std::size_t max_segment_len);

PackedPair pack_entity_single(const corpus::Entity& entity, const Vocab& vocab,
                              std::size_t max_segment_len);

}  // namespace zel::ranker
