#include "zel/eval/baselines.hpp"

#include <algorithm>

#include "zel/common/errors.hpp"
#include "zel/index/tokenizer.hpp"

namespace zel::eval {

const char* to_string(BaselineKind k) {
  return k == BaselineKind::EditDistance ? "edit_distance" : "doc_bm25";
}

BaselineKind baseline_from_string(const std::string& s) {
  if (s == "edit_distance") return BaselineKind::EditDistance;
  if (s == "doc_bm25") return BaselineKind::DocBM25;
  throw ConfigError("unknown baseline: " + s + " (expected edit_distance or doc_bm25)");
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = b.size();
  std::vector<std::size_t> row(n + 1);
  for (std::size_t j = 0; j <= n; ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t saved = row[j];
      const std::size_t subst = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, subst});
      diag = saved;
    }
  }
  return row[n];
}

ranker::RankedPrediction baseline_rank(const corpus::Mention& mention,
                                       const std::vector<const corpus::Entity*>& candidates,
                                       BaselineKind kind, const index::InvertedIndex* index,
                                       const index::BM25Params& params) {
  ranker::RankedPrediction pred;
  pred.mention_id = mention.mention_id;
  if (candidates.empty()) return pred;

  if (kind == BaselineKind::EditDistance) {
    const auto folded = index::fold_case(mention.mention_string);
    for (const auto* e : candidates) {
      const auto dist = levenshtein(folded, index::fold_case(e->title));
      pred.scores.push_back(-static_cast<double>(dist));  // higher is better
    }
  } else {
    if (!index) throw ContractError("doc_bm25 baseline needs an inverted index");
    const auto query = index::tokenize(mention.mention_string, index->tokenizer());
    for (const auto* e : candidates) {
      long ord = -1;
      for (std::size_t i = 0; i < index->entity_ids().size(); ++i) {
        if (index->entity_ids()[i] == e->entity_id) {
          ord = static_cast<long>(i);
          break;
        }
      }
      if (ord < 0)
        throw ContractError("baseline candidate '" + e->entity_id + "' is not in the index");
      pred.scores.push_back(index->score(query, static_cast<std::size_t>(ord), params));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < pred.scores.size(); ++i) {
    if (pred.scores[i] > pred.scores[best]) best = i;
  }
  pred.argmax = best;
  pred.predicted_entity_id = candidates[best]->entity_id;
  return pred;
}

}  // namespace zel::eval
