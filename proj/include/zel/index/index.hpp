#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/index/tokenizer.hpp"

namespace zel::index {

struct BM25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct RetrievalConfig {
  std::size_t k = 64;
  bool query_with_context = false;  // mention string only by default
};

struct Posting {
  std::uint32_t entity_ordinal;
  std::uint32_t tf;
};

struct CandidateSet {
  std::string mention_id;
  std::vector<std::pair<std::string, double>> candidates;  // (entity_id, score), non-increasing
  bool gold_in_set = false;
  std::optional<std::size_t> gold_rank;  // 0-based, set when gold_in_set
};

// Read-only after build. One "document" per entity: title + " " + description.
class InvertedIndex {
 public:
  static InvertedIndex build(const corpus::EntityDictionary& dictionary,
                             const TokenizerConfig& cfg);

  // BM25 with idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)); query-side term
  // frequency is ignored (unique query terms each contribute once).
  double score(const std::vector<std::string>& query_tokens, std::size_t entity_ordinal,
               const BM25Params& params) const;

  // Top-k entities ordered by score descending, ascending entity_id at ties.
  // Zero-score entities rank after all matches, so k >= K yields the whole
  // dictionary. A mention that tokenizes to nothing yields an empty set.
  CandidateSet retrieve(const corpus::Mention& mention, const BM25Params& params,
                        const RetrievalConfig& retrieval) const;

  std::size_t num_entities() const { return doc_lengths_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const std::string& world_id() const { return world_id_; }
  const std::vector<std::string>& entity_ids() const { return entity_ids_; }
  const TokenizerConfig& tokenizer() const { return tokenizer_; }
  std::size_t doc_length(std::size_t ordinal) const { return doc_lengths_[ordinal]; }
  std::size_t num_terms() const { return postings_.size(); }
  std::size_t empty_documents() const { return empty_documents_; }

  // term -> document frequency, for tests and diagnostics
  std::size_t document_frequency(const std::string& term) const;

  void save(const std::filesystem::path& path, std::uint64_t config_hash) const;
  static InvertedIndex load(const std::filesystem::path& path,
                            std::uint64_t* config_hash = nullptr);

 private:
  std::string world_id_;
  TokenizerConfig tokenizer_;
  std::map<std::string, std::vector<Posting>> postings_;  // ordered, for stable serialization
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<std::string> entity_ids_;  // ordinal -> entity_id
  double avg_doc_length_ = 0.0;
  std::size_t empty_documents_ = 0;
};

double recall_at_k(const std::vector<CandidateSet>& candidate_sets);

}  // namespace zel::index
