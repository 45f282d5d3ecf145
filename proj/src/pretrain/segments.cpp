#include "zel/pretrain/segments.hpp"

#include "zel/index/tokenizer.hpp"

namespace zel::pretrain {

namespace {

void chop(const std::vector<std::size_t>& ids, std::size_t segment_len, SegmentPool& out) {
  std::size_t pos = 0;
  while (pos + segment_len <= ids.size()) {
    out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                     ids.begin() + static_cast<std::ptrdiff_t>(pos + segment_len));
    pos += segment_len;
  }
  const std::size_t rest = ids.size() - pos;
  if (rest >= kMinRemainder) {
    out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(pos), ids.end());
  }
}

std::vector<std::size_t> to_ids(const std::string& text, const ranker::Vocab& vocab) {
  std::vector<std::size_t> ids;
  for (const auto& tok : index::tokenize(text, vocab.tokenizer())) ids.push_back(vocab.id(tok));
  return ids;
}

}  // namespace

SegmentPool make_segments(const std::vector<corpus::Document>& documents,
                          const ranker::Vocab& vocab, std::size_t segment_len) {
  SegmentPool pool;
  for (const auto& doc : documents) chop(to_ids(doc.text, vocab), segment_len, pool);
  return pool;
}

SegmentPool make_segments_from_text(const std::string& text, const ranker::Vocab& vocab,
                                    std::size_t segment_len) {
  SegmentPool pool;
  chop(to_ids(text, vocab), segment_len, pool);
  return pool;
}

PoolSplit split_heldout(const SegmentPool& pool, std::size_t every_nth) {
  PoolSplit split;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (every_nth > 0 && i % every_nth == every_nth - 1) {
      split.heldout.push_back(pool[i]);
    } else {
      split.train.push_back(pool[i]);
    }
  }
  return split;
}

}  // namespace zel::pretrain
