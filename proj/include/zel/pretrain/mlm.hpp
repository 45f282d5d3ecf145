#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zel/autodiff/adam.hpp"
#include "zel/autodiff/checkpoint.hpp"
#include "zel/autodiff/ops.hpp"
#include "zel/common/errors.hpp"
#include "zel/pretrain/masking.hpp"
#include "zel/pretrain/segments.hpp"
#include "zel/ranker/model.hpp"

namespace zel::pretrain {

// Masked-LM model: one encoder (parameter prefix "enc.", shared with the
// Full ranker) plus an output projection tied to the token embeddings with a
// free bias.
template <typename T>
class MlmModel {
 public:
  static MlmModel init(const ranker::RankerConfig& cfg, const ranker::Vocab& vocab,
                       std::uint64_t seed) {
    ranker::RankerConfig filled = cfg;
    filled.vocab_size = vocab.size();
    filled.validate();

    MlmModel model;
    model.cfg_ = filled;
    model.encoder_ = ranker::Encoder<T>("enc.", filled);
    Rng rng(seed);
    model.encoder_.init(model.params_, rng);
    model.params_.create_full("mlm.bias", {static_cast<std::int64_t>(filled.vocab_size)}, T(0));
    return model;
  }

  const ranker::RankerConfig& config() const { return cfg_; }
  autodiff::ParameterStore<T>& params() { return params_; }
  const autodiff::ParameterStore<T>& params() const { return params_; }
  ranker::Encoder<T>& encoder() { return encoder_; }

  std::vector<std::string> parameter_names() const {
    auto names = encoder_.parameter_names();
    names.push_back("mlm.bias");
    return names;
  }

  // Mean cross-entropy over every label position in the batch. total_labels
  // receives the label count; zero labels means no loss graph (undefined).
  autodiff::Tensor<T> batch_loss(const std::vector<MaskedSegment>& batch,
                                 std::size_t* total_labels = nullptr) {
    namespace ad = autodiff;
    std::size_t labels = 0;
    for (const auto& seg : batch) labels += seg.label_positions.size();
    if (total_labels) *total_labels = labels;
    if (labels == 0) return autodiff::Tensor<T>();

    auto emb_t = ad::transpose(params_.at("enc.tok_emb"));
    std::vector<ad::Tensor<T>> pieces;
    for (const auto& seg : batch) {
      if (seg.label_positions.empty()) continue;
      auto hidden = encoder_.forward(params_, segment_input(seg.input_ids));
      auto selected = ad::gather_rows(hidden, seg.label_positions);
      auto logits = ad::add(ad::matmul(selected, emb_t), params_.at("mlm.bias"));
      auto ce = ad::cross_entropy(logits, seg.label_ids);
      // cross_entropy averages per segment; reweight to a global label mean
      pieces.push_back(ad::scale(ce, static_cast<T>(static_cast<double>(seg.label_ids.size()) /
                                                    static_cast<double>(labels))));
    }
    auto loss = pieces[0];
    for (std::size_t i = 1; i < pieces.size(); ++i) loss = ad::add(loss, pieces[i]);
    return loss;
  }

  // Fraction of perturbed positions whose argmax prediction recovers the
  // original token. Deterministic for a fixed cfg.rng_seed.
  double mlm_accuracy(const SegmentPool& segments, const MaskingConfig& cfg) {
    autodiff::NoGradGuard guard;
    Rng rng(cfg.rng_seed);
    std::size_t total = 0, correct = 0;
    for (const auto& seg : segments) {
      auto masked = mask_segment(seg, cfg, cfg_.vocab_size, rng);
      if (masked.label_positions.empty()) continue;
      auto preds = predict_labels(masked);
      for (std::size_t i = 0; i < preds.size(); ++i) {
        ++total;
        if (preds[i] == masked.label_ids[i]) ++correct;
      }
    }
    if (total == 0)
      throw ValidationError("mlm_accuracy: no labels in the evaluation segments");
    return static_cast<double>(correct) / static_cast<double>(total);
  }

  // argmax token id per label position of one masked segment
  std::vector<std::size_t> predict_labels(const MaskedSegment& masked) {
    namespace ad = autodiff;
    autodiff::NoGradGuard guard;
    auto hidden = encoder_.forward(params_, segment_input(masked.input_ids));
    auto selected = ad::gather_rows(hidden, masked.label_positions);
    auto logits = ad::add(ad::matmul(selected, ad::transpose(params_.at("enc.tok_emb"))),
                          params_.at("mlm.bias"));
    const auto V = cfg_.vocab_size;
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < masked.label_positions.size(); ++r) {
      const T* row = logits.values().data() + r * V;
      std::size_t best = 0;
      for (std::size_t j = 1; j < V; ++j)
        if (row[j] > row[best]) best = j;
      out.push_back(best);
    }
    return out;
  }

  static PackedPair segment_input(const std::vector<std::size_t>& ids) {
    PackedPair p;
    p.token_ids = ids;
    p.segment_ids.assign(ids.size(), 0);
    p.mention_flags.assign(ids.size(), 0);
    p.attention_mask.assign(ids.size(), 1);
    return p;
  }

 private:
  ranker::RankerConfig cfg_;
  autodiff::ParameterStore<T> params_;
  ranker::Encoder<T> encoder_;

  using PackedPair = ranker::PackedPair;
};

// ---- stage plans ----

enum class SelectorKind { Src, Tgt, SrcTgt, Open };

inline const char* to_string(SelectorKind k) {
  switch (k) {
    case SelectorKind::Src: return "src";
    case SelectorKind::Tgt: return "tgt";
    case SelectorKind::SrcTgt: return "src+tgt";
    case SelectorKind::Open: return "open";
  }
  return "src";
}

inline SelectorKind selector_from_string(const std::string& s) {
  if (s == "src") return SelectorKind::Src;
  if (s == "tgt") return SelectorKind::Tgt;
  if (s == "src+tgt" || s == "src_tgt") return SelectorKind::SrcTgt;
  if (s == "open") return SelectorKind::Open;
  throw ConfigError("unknown corpus selector: " + s + " (expected src, tgt, src+tgt or open)");
}

struct Stage {
  SelectorKind selector;
  std::size_t steps = 0;
};

using StagePlan = std::vector<Stage>;

struct StagePools {
  SegmentPool src;
  SegmentPool tgt;
  SegmentPool open;
  SegmentPool tgt_heldout;  // MLM accuracy is tracked on these
};

struct StageReportRow {
  std::size_t stage = 0;
  std::string selector;
  std::size_t step = 0;  // cumulative within the stage
  double loss = 0.0;     // mean loss since the previous row
  double mlm_accuracy = 0.0;
};

struct PretrainConfig {
  MaskingConfig masking;
  MaskingConfig eval_masking;  // fixed seed, reused for every evaluation
  std::size_t batch_segments = 8;
  double lr_scratch = 1e-4;    // first stage of a fresh model
  double lr_continue = 2e-5;   // later stages and pre-initialized models
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  bool initially_pretrained = false;  // model arrived from a checkpoint
  std::size_t eval_every = 0;         // extra report rows every n steps
};

// Runs the stages in order on the same parameters. Each stage gets a fresh
// optimizer (warmup restarts) and its learning rate depends on whether any
// training preceded it. After every stage the target-domain MLM accuracy is
// appended to the report.
template <typename T>
std::vector<StageReportRow> run_stage_plan(MlmModel<T>& model, const StagePlan& plan,
                                           const StagePools& pools, const PretrainConfig& cfg) {
  cfg.masking.validate();
  cfg.eval_masking.validate();
  // resolve every selector before touching the model
  for (const auto& stage : plan) {
    const SegmentPool* pool = nullptr;
    switch (stage.selector) {
      case SelectorKind::Src: pool = &pools.src; break;
      case SelectorKind::Tgt: pool = &pools.tgt; break;
      case SelectorKind::SrcTgt: pool = nullptr; break;  // checked below
      case SelectorKind::Open: pool = &pools.open; break;
    }
    if (stage.selector == SelectorKind::SrcTgt) {
      if (pools.src.empty() && pools.tgt.empty())
        throw ConfigError("stage plan: src+tgt selector with empty source and target pools");
    } else if (pool->empty()) {
      throw ConfigError(std::string("stage plan: selector '") + to_string(stage.selector) +
                        "' resolves to an empty segment pool");
    }
  }
  if (!plan.empty() && pools.tgt_heldout.empty())
    throw ConfigError("stage plan: no heldout target segments for MLM evaluation");

  std::vector<StageReportRow> report;
  Rng master(cfg.seed);
  bool trained_before = cfg.initially_pretrained;

  for (std::size_t stage_idx = 0; stage_idx < plan.size(); ++stage_idx) {
    const auto& stage = plan[stage_idx];
    Rng stage_rng = master.fork(1000 + stage_idx);

    // materialize the stage pool; src+tgt is a seeded uniform interleave
    std::vector<const Segment*> pool;
    auto add_all = [&pool](const SegmentPool& p) {
      for (const auto& s : p) pool.push_back(&s);
    };
    switch (stage.selector) {
      case SelectorKind::Src: add_all(pools.src); break;
      case SelectorKind::Tgt: add_all(pools.tgt); break;
      case SelectorKind::Open: add_all(pools.open); break;
      case SelectorKind::SrcTgt:
        add_all(pools.src);
        add_all(pools.tgt);
        stage_rng.shuffle(pool);
        break;
    }

    autodiff::AdamConfig adam_cfg;
    adam_cfg.learning_rate = trained_before ? cfg.lr_continue : cfg.lr_scratch;
    adam_cfg.warmup_steps =
        static_cast<std::size_t>(cfg.warmup_fraction * static_cast<double>(stage.steps));
    autodiff::Adam<T> adam(model.params(), model.parameter_names(), adam_cfg);

    Rng mask_rng = master.fork(2000 + stage_idx);
    Rng order_rng = master.fork(3000 + stage_idx);

    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t cursor = order.size();  // forces a shuffle on first use

    double window_loss = 0.0;
    std::size_t window_steps = 0;
    std::size_t skipped_batches = 0;
    for (std::size_t step = 0; step < stage.steps; ++step) {
      std::vector<const Segment*> batch;
      for (std::size_t b = 0; b < cfg.batch_segments; ++b) {
        if (cursor >= order.size()) {
          order_rng.shuffle(order);
          cursor = 0;
        }
        batch.push_back(pool[order[cursor++]]);
      }
      auto masked = mask_batch(batch, cfg.masking, model.config().vocab_size, mask_rng);
      std::size_t labels = 0;
      auto loss = model.batch_loss(masked, &labels);
      if (labels == 0) {  // nothing to learn from this draw
        ++skipped_batches;
        continue;
      }
      model.params().clear_grads();
      loss.backward();
      adam.step();
      window_loss += static_cast<double>(loss.item());
      ++window_steps;

      if (cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0 && step + 1 < stage.steps) {
        report.push_back(StageReportRow{
            stage_idx, to_string(stage.selector), step + 1,
            window_steps ? window_loss / static_cast<double>(window_steps) : 0.0,
            model.mlm_accuracy(pools.tgt_heldout, cfg.eval_masking)});
        window_loss = 0.0;
        window_steps = 0;
      }
    }
    (void)skipped_batches;
    if (stage.steps > 0) trained_before = true;

    report.push_back(StageReportRow{
        stage_idx, to_string(stage.selector), stage.steps,
        window_steps ? window_loss / static_cast<double>(window_steps) : 0.0,
        model.mlm_accuracy(pools.tgt_heldout, cfg.eval_masking)});
  }
  return report;
}

}  // namespace zel::pretrain
