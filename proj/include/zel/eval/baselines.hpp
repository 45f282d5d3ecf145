#pragma once

#include <string>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/index/index.hpp"
#include "zel/ranker/model.hpp"

namespace zel::eval {

enum class BaselineKind { EditDistance, DocBM25 };

const char* to_string(BaselineKind k);
BaselineKind baseline_from_string(const std::string& s);

// Unit-cost insert/delete/substitute distance.
std::size_t levenshtein(const std::string& a, const std::string& b);

// Model-free candidate ranking. EditDistance orders candidates by ascending
// case-folded Levenshtein distance between mention string and title; DocBM25
// orders by descending BM25 of the mention string against the entity
// document. Ties keep candidate order, so the ranking is deterministic.
ranker::RankedPrediction baseline_rank(const corpus::Mention& mention,
                                       const std::vector<const corpus::Entity*>& candidates,
                                       BaselineKind kind, const index::InvertedIndex* index,
                                       const index::BM25Params& params = {});

}  // namespace zel::eval
