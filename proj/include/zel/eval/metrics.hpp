#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/index/index.hpp"
#include "zel/ranker/model.hpp"

namespace zel::eval {

using ranker::RankedPrediction;

// Top-1 accuracy over the mentions whose gold entity was retrieved.
// predictions[i] must correspond to candidate_sets[i]. Throws when no
// candidate set contains its gold (the metric is undefined).
double normalized_accuracy(const std::vector<RankedPrediction>& predictions,
                           const std::vector<index::CandidateSet>& candidate_sets);

// Top-1 accuracy over the whole mention list. Mentions whose gold entity is
// outside the candidate set can never count as correct.
double unnormalized_accuracy(const std::vector<RankedPrediction>& predictions,
                             const std::vector<index::CandidateSet>& candidate_sets);

// Unweighted mean over per-world values.
double macro_average(const std::vector<double>& per_world);

struct WorldEval {
  std::string world_id;
  std::size_t n_mentions = 0;
  std::size_t n_qualifying = 0;  // candidate set contains the gold entity
  std::size_t n_correct = 0;
  std::optional<double> normalized_acc;  // absent when nothing qualifies
  double unnormalized_acc = 0.0;
  double recall_at_k = 0.0;
};

WorldEval evaluate_world(const std::string& world_id,
                         const std::vector<RankedPrediction>& predictions,
                         const std::vector<index::CandidateSet>& candidate_sets);

struct CategoryRow {
  corpus::MentionCategory category = corpus::MentionCategory::LowOverlap;
  std::size_t n = 0;
  std::size_t n_qualifying = 0;
  std::size_t n_correct = 0;
  std::optional<double> recall_at_k;       // absent when the row is empty
  std::optional<double> normalized_acc;    // absent when nothing qualifies
  std::optional<double> unnormalized_acc;  // absent when the row is empty
};

// Metrics within each category partition; all four rows are present and the
// row counts sum to the mention total.
std::vector<CategoryRow> category_breakdown(
    const std::vector<const corpus::Mention*>& mentions,
    const std::vector<RankedPrediction>& predictions,
    const std::vector<index::CandidateSet>& candidate_sets);

}  // namespace zel::eval
