#include "zel/eval/metrics.hpp"

#include "zel/common/errors.hpp"

namespace zel::eval {

namespace {

bool is_correct(const RankedPrediction& pred, const index::CandidateSet& cs) {
  if (!cs.gold_in_set || !pred.argmax.has_value()) return false;
  return pred.predicted_entity_id == cs.candidates[*cs.gold_rank].first;
}

void check_aligned(const std::vector<RankedPrediction>& predictions,
                   const std::vector<index::CandidateSet>& candidate_sets) {
  if (predictions.size() != candidate_sets.size())
    throw ContractError("evaluation inputs are misaligned: " +
                        std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(candidate_sets.size()) + " candidate sets");
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].mention_id != candidate_sets[i].mention_id)
      throw ContractError("evaluation inputs are misaligned at position " + std::to_string(i) +
                          ": " + predictions[i].mention_id + " vs " +
                          candidate_sets[i].mention_id);
  }
}

}  // namespace

double normalized_accuracy(const std::vector<RankedPrediction>& predictions,
                           const std::vector<index::CandidateSet>& candidate_sets) {
  check_aligned(predictions, candidate_sets);
  std::size_t qualifying = 0, correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!candidate_sets[i].gold_in_set) continue;
    ++qualifying;
    if (is_correct(predictions[i], candidate_sets[i])) ++correct;
  }
  if (qualifying == 0)
    throw ValidationError("normalized accuracy is undefined: no candidate set contains its gold");
  return static_cast<double>(correct) / static_cast<double>(qualifying);
}

double unnormalized_accuracy(const std::vector<RankedPrediction>& predictions,
                             const std::vector<index::CandidateSet>& candidate_sets) {
  check_aligned(predictions, candidate_sets);
  if (predictions.empty())
    throw ValidationError("unnormalized accuracy is undefined on an empty mention set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (is_correct(predictions[i], candidate_sets[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double macro_average(const std::vector<double>& per_world) {
  if (per_world.empty()) throw ValidationError("macro average over an empty world list");
  double sum = 0.0;
  for (double v : per_world) sum += v;
  return sum / static_cast<double>(per_world.size());
}

WorldEval evaluate_world(const std::string& world_id,
                         const std::vector<RankedPrediction>& predictions,
                         const std::vector<index::CandidateSet>& candidate_sets) {
  check_aligned(predictions, candidate_sets);
  WorldEval out;
  out.world_id = world_id;
  out.n_mentions = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (candidate_sets[i].gold_in_set) ++out.n_qualifying;
    if (is_correct(predictions[i], candidate_sets[i])) ++out.n_correct;
  }
  if (out.n_mentions > 0) {
    out.recall_at_k =
        static_cast<double>(out.n_qualifying) / static_cast<double>(out.n_mentions);
    out.unnormalized_acc =
        static_cast<double>(out.n_correct) / static_cast<double>(out.n_mentions);
  }
  if (out.n_qualifying > 0) {
    out.normalized_acc =
        static_cast<double>(out.n_correct) / static_cast<double>(out.n_qualifying);
  }
  return out;
}

std::vector<CategoryRow> category_breakdown(
    const std::vector<const corpus::Mention*>& mentions,
    const std::vector<RankedPrediction>& predictions,
    const std::vector<index::CandidateSet>& candidate_sets) {
  check_aligned(predictions, candidate_sets);
  if (mentions.size() != predictions.size())
    throw ContractError("category_breakdown: mention list misaligned with predictions");

  std::map<corpus::MentionCategory, CategoryRow> rows;
  for (auto cat :
       {corpus::MentionCategory::HighOverlap, corpus::MentionCategory::MultipleCategories,
        corpus::MentionCategory::AmbiguousSubstring, corpus::MentionCategory::LowOverlap}) {
    rows[cat].category = cat;
  }
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    auto& row = rows[mentions[i]->category];
    ++row.n;
    if (candidate_sets[i].gold_in_set) ++row.n_qualifying;
    if (is_correct(predictions[i], candidate_sets[i])) ++row.n_correct;
  }
  std::vector<CategoryRow> out;
  for (auto& [cat, row] : rows) {
    if (row.n > 0) {
      row.recall_at_k = static_cast<double>(row.n_qualifying) / static_cast<double>(row.n);
      row.unnormalized_acc = static_cast<double>(row.n_correct) / static_cast<double>(row.n);
    }
    if (row.n_qualifying > 0) {
      row.normalized_acc =
          static_cast<double>(row.n_correct) / static_cast<double>(row.n_qualifying);
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace zel::eval
