#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "zel/autodiff/adam.hpp"
#include "zel/index/index.hpp"
#include "zel/ranker/model.hpp"

namespace zel::ranker {

// One supervised example: a mention, its retrieved candidates (in candidate
// order) and the gold position among them.
struct TrainExample {
  const corpus::Mention* mention = nullptr;
  std::vector<const corpus::Entity*> candidates;
  std::size_t gold_index = 0;
};

struct ExampleBuildStats {
  std::size_t usable = 0;
  std::size_t skipped_gold_missing = 0;  // gold fell outside top-k, not forced
  std::size_t skipped_no_candidates = 0;
};

// Pairs mentions with their candidate sets. Mentions whose gold entity is
// absent from the candidates are skipped unless force_gold injects it in
// place of the weakest candidate.
std::vector<TrainExample> make_examples(
    const std::vector<const corpus::Mention*>& mentions,
    const std::unordered_map<std::string, const index::CandidateSet*>& candidates_by_mention,
    const corpus::EntityDictionary& dictionary, bool force_gold,
    ExampleBuildStats* stats = nullptr);

inline std::vector<TrainExample> make_examples(
    const std::vector<const corpus::Mention*>& mentions,
    const std::vector<index::CandidateSet>& candidate_sets,
    const corpus::EntityDictionary& dictionary, bool force_gold,
    ExampleBuildStats* stats = nullptr) {
  std::unordered_map<std::string, const index::CandidateSet*> by_mention;
  for (const auto& cs : candidate_sets) by_mention[cs.mention_id] = &cs;
  return make_examples(mentions, by_mention, dictionary, force_gold, stats);
}

struct FinetuneConfig {
  std::size_t epochs = 3;
  double learning_rate = 1e-4;  // 2e-5 when continuing from a pretrained encoder
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct FinetuneReport {
  std::size_t steps = 0;
  std::vector<double> epoch_mean_loss;
};

// Softmax ranking loss over each mention's candidates, one mention per step.
template <typename T>
FinetuneReport finetune(RankerModel<T>& model, const Vocab& vocab,
                        const std::vector<TrainExample>& examples, const FinetuneConfig& cfg) {
  FinetuneReport report;
  if (examples.empty()) return report;

  const std::size_t total_steps = cfg.epochs * examples.size();
  autodiff::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  adam_cfg.warmup_steps = static_cast<std::size_t>(cfg.warmup_fraction *
                                                   static_cast<double>(total_steps));
  autodiff::Adam<T> adam(model.params(), model.parameter_names(), adam_cfg);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (auto idx : order) {
      const auto& ex = examples[idx];
      model.params().clear_grads();
      auto scores = model.score_candidates(*ex.mention, ex.candidates, vocab);
      auto loss = rank_loss(scores, ex.gold_index);
      loss.backward();
      adam.step();
      loss_sum += static_cast<double>(loss.item());
      ++report.steps;
    }
    report.epoch_mean_loss.push_back(loss_sum / static_cast<double>(examples.size()));
  }
  return report;
}

}  // namespace zel::ranker
