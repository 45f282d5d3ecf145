#pragma once

#include <cstddef>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/ranker/vocab.hpp"

namespace zel::pretrain {

using Segment = std::vector<std::size_t>;  // token ids
using SegmentPool = std::vector<Segment>;

// Contiguous non-overlapping windows of segment_len tokens per document. The
// final shorter remainder is kept when it has at least kMinRemainder tokens.
inline constexpr std::size_t kMinRemainder = 8;

SegmentPool make_segments(const std::vector<corpus::Document>& documents,
                          const ranker::Vocab& vocab, std::size_t segment_len);

// Segments from a plain text blob (the open-corpus path).
SegmentPool make_segments_from_text(const std::string& text, const ranker::Vocab& vocab,
                                    std::size_t segment_len);

// Deterministically splits a pool: every nth segment goes to the heldout
// side, the rest stay trainable.
struct PoolSplit {
  SegmentPool train;
  SegmentPool heldout;
};
PoolSplit split_heldout(const SegmentPool& pool, std::size_t every_nth);

}  // namespace zel::pretrain
