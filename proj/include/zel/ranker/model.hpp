#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "zel/autodiff/adam.hpp"
#include "zel/autodiff/checkpoint.hpp"
#include "zel/autodiff/ops.hpp"
#include "zel/autodiff/params.hpp"
#include "zel/common/errors.hpp"
#include "zel/common/rng.hpp"
#include "zel/corpus/types.hpp"
#include "zel/ranker/packing.hpp"
#include "zel/ranker/vocab.hpp"

namespace zel::ranker {

enum class Arch { Full, Pool, CandPool };

inline const char* to_string(Arch a) {
  switch (a) {
    case Arch::Full: return "full";
    case Arch::Pool: return "pool";
    case Arch::CandPool: return "cand_pool";
  }
  return "full";
}

inline Arch arch_from_string(const std::string& s) {
  if (s == "full") return Arch::Full;
  if (s == "pool") return Arch::Pool;
  if (s == "cand_pool") return Arch::CandPool;
  throw ConfigError("unknown architecture: " + s + " (expected full, pool or cand_pool)");
}

struct RankerConfig {
  Arch arch = Arch::Full;
  std::size_t layers = 2;
  std::size_t hidden = 32;
  std::size_t heads = 2;
  std::size_t max_segment_len = 32;  // tokens per side
  std::size_t vocab_size = 0;        // filled in from the vocab
  std::size_t ffn_multiplier = 4;
  double init_stddev = 0.02;

  std::size_t pair_length() const { return 2 * max_segment_len + 3; }
  std::size_t single_length() const { return max_segment_len + 2; }

  void validate() const {
    if (hidden == 0 || heads == 0 || hidden % heads != 0)
      throw ConfigError("hidden size must be a positive multiple of the head count");
    if (max_segment_len < 4) throw ConfigError("max_segment_len must be at least 4");
    if (vocab_size <= Vocab::kNumSpecials) throw ConfigError("vocab_size not set");
    if (layers == 0) throw ConfigError("need at least one transformer layer");
  }
};

// One Transformer encoder whose parameters live under a name prefix inside a
// shared ParameterStore. Post-norm blocks, gelu feed-forward, learned
// positional and segment embeddings plus the mention-flag vector.
template <typename T>
class Encoder {
 public:
  Encoder() = default;
  Encoder(std::string prefix, RankerConfig cfg) : prefix_(std::move(prefix)), cfg_(cfg) {}

  const std::string& prefix() const { return prefix_; }
  std::string token_embedding_name() const { return prefix_ + "tok_emb"; }

  void init(autodiff::ParameterStore<T>& params, Rng& rng) const {
    const auto H = static_cast<std::int64_t>(cfg_.hidden);
    const auto V = static_cast<std::int64_t>(cfg_.vocab_size);
    const auto P = static_cast<std::int64_t>(cfg_.pair_length());
    const auto F = static_cast<std::int64_t>(cfg_.hidden * cfg_.ffn_multiplier);
    const double s = cfg_.init_stddev;

    params.create_normal(prefix_ + "tok_emb", {V, H}, rng, s);
    params.create_normal(prefix_ + "pos_emb", {P, H}, rng, s);
    params.create_normal(prefix_ + "seg_emb", {2, H}, rng, s);
    params.create_normal(prefix_ + "flag_emb", {H}, rng, s);
    params.create_full(prefix_ + "emb_ln.g", {H}, T(1));
    params.create_full(prefix_ + "emb_ln.b", {H}, T(0));
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string b = prefix_ + "block" + std::to_string(l) + ".";
      for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"})
        params.create_normal(b + w, {H, H}, rng, s);
      for (const char* bias : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"})
        params.create_full(b + bias, {H}, T(0));
      params.create_full(b + "ln1.g", {H}, T(1));
      params.create_full(b + "ln1.b", {H}, T(0));
      params.create_normal(b + "ffn.w1", {H, F}, rng, s);
      params.create_full(b + "ffn.b1", {F}, T(0));
      params.create_normal(b + "ffn.w2", {F, H}, rng, s);
      params.create_full(b + "ffn.b2", {H}, T(0));
      params.create_full(b + "ln2.g", {H}, T(1));
      params.create_full(b + "ln2.b", {H}, T(0));
    }
  }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names{prefix_ + "tok_emb",  prefix_ + "pos_emb",
                                   prefix_ + "seg_emb",  prefix_ + "flag_emb",
                                   prefix_ + "emb_ln.g", prefix_ + "emb_ln.b"};
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string b = prefix_ + "block" + std::to_string(l) + ".";
      for (const char* n : {"attn.wq", "attn.bq", "attn.wk", "attn.bk", "attn.wv", "attn.bv",
                            "attn.wo", "attn.bo", "ln1.g", "ln1.b", "ffn.w1", "ffn.b1", "ffn.w2",
                            "ffn.b2", "ln2.g", "ln2.b"})
        names.push_back(b + n);
    }
    return names;
  }

  // Returns the hidden states of every position, shape [len, H].
  autodiff::Tensor<T> forward(autodiff::ParameterStore<T>& params,
                              const PackedPair& packed) const {
    using autodiff::Tensor;
    namespace ad = autodiff;
    const std::size_t len = packed.length();
    const std::size_t H = cfg_.hidden;
    const std::size_t A = cfg_.heads;
    const std::size_t head_dim = H / A;
    if (len > cfg_.pair_length())
      throw ContractError("packed input of length " + std::to_string(len) +
                          " exceeds the model maximum " + std::to_string(cfg_.pair_length()));

    std::vector<std::size_t> positions(len);
    for (std::size_t i = 0; i < len; ++i) positions[i] = i;

    auto x = ad::add(ad::gather_rows(params.at(prefix_ + "tok_emb"), packed.token_ids),
                     ad::gather_rows(params.at(prefix_ + "pos_emb"), positions));
    x = ad::add(x, ad::gather_rows(params.at(prefix_ + "seg_emb"), packed.segment_ids));
    std::vector<T> flags(len);
    for (std::size_t i = 0; i < len; ++i) flags[i] = static_cast<T>(packed.mention_flags[i]);
    x = ad::add_flag_embedding(x, flags, params.at(prefix_ + "flag_emb"));
    x = ad::layer_norm(x, params.at(prefix_ + "emb_ln.g"), params.at(prefix_ + "emb_ln.b"));

    // additive key mask: masked-out (pad) keys get a large negative logit
    std::vector<T> mask_values(len * len, T(0));
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j)
        if (!packed.attention_mask[j]) mask_values[i * len + j] = T(-1e9);
    auto mask = ad::constant<T>({static_cast<std::int64_t>(len), static_cast<std::int64_t>(len)},
                                std::move(mask_values));

    const T attn_scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string b = prefix_ + "block" + std::to_string(l) + ".";
      auto q = ad::add(ad::matmul(x, params.at(b + "attn.wq")), params.at(b + "attn.bq"));
      auto k = ad::add(ad::matmul(x, params.at(b + "attn.wk")), params.at(b + "attn.bk"));
      auto v = ad::add(ad::matmul(x, params.at(b + "attn.wv")), params.at(b + "attn.bv"));

      std::vector<Tensor<T>> heads;
      heads.reserve(A);
      for (std::size_t h = 0; h < A; ++h) {
        const std::size_t c0 = h * head_dim;
        const std::size_t c1 = c0 + head_dim;
        auto qh = ad::col_slice(q, c0, c1);
        auto kh = ad::col_slice(k, c0, c1);
        auto vh = ad::col_slice(v, c0, c1);
        auto scores = ad::add(ad::scale(ad::matmul(qh, ad::transpose(kh)), attn_scale), mask);
        heads.push_back(ad::matmul(ad::softmax(scores), vh));
      }
      auto attn_out = ad::add(ad::matmul(ad::concat_cols(heads), params.at(b + "attn.wo")),
                              params.at(b + "attn.bo"));
      x = ad::layer_norm(ad::add(x, attn_out), params.at(b + "ln1.g"), params.at(b + "ln1.b"));

      auto h1 = ad::gelu(ad::add(ad::matmul(x, params.at(b + "ffn.w1")), params.at(b + "ffn.b1")));
      auto h2 = ad::add(ad::matmul(h1, params.at(b + "ffn.w2")), params.at(b + "ffn.b2"));
      x = ad::layer_norm(ad::add(x, h2), params.at(b + "ln2.g"), params.at(b + "ln2.b"));
    }
    return x;
  }

  // Pooled representation: last hidden layer at the start token.
  autodiff::Tensor<T> encode(autodiff::ParameterStore<T>& params, const PackedPair& packed) const {
    return autodiff::row(forward(params, packed), 0);
  }

 private:
  std::string prefix_;
  RankerConfig cfg_;
};

// -log softmax(scores)[gold]
template <typename T>
autodiff::Tensor<T> rank_loss(const autodiff::Tensor<T>& scores, std::size_t gold_index) {
  if (scores.rank() != 1 || gold_index >= scores.size())
    throw ContractError("rank_loss: gold index " + std::to_string(gold_index) +
                        " out of range for " + std::to_string(scores.size()) + " scores");
  return autodiff::cross_entropy(scores, {gold_index});
}

struct RankedPrediction {
  std::string mention_id;
  std::vector<double> scores;           // aligned to the candidate order
  std::optional<std::size_t> argmax;    // absent on an empty candidate set
  std::string predicted_entity_id;      // empty on abstain
};

template <typename T>
class RankerModel {
 public:
  static RankerModel init(const RankerConfig& cfg, const Vocab& vocab, std::uint64_t seed) {
    RankerConfig filled = cfg;
    filled.vocab_size = vocab.size();
    filled.validate();

    RankerModel model;
    model.cfg_ = filled;
    Rng rng(seed);
    if (filled.arch == Arch::Full) {
      model.encoder_ = Encoder<T>("enc.", filled);
      model.encoder_.init(model.params_, rng);
      model.params_.create_normal("score.w", {static_cast<std::int64_t>(filled.hidden)}, rng,
                                  filled.init_stddev);
    } else {
      model.mention_encoder_ = Encoder<T>("m_enc.", filled);
      model.entity_encoder_ = Encoder<T>("e_enc.", filled);
      model.mention_encoder_.init(model.params_, rng);
      model.entity_encoder_.init(model.params_, rng);
    }
    return model;
  }

  const RankerConfig& config() const { return cfg_; }
  autodiff::ParameterStore<T>& params() { return params_; }
  const autodiff::ParameterStore<T>& params() const { return params_; }

  // Trainable parameters of this architecture.
  std::vector<std::string> parameter_names() const {
    if (cfg_.arch == Arch::Full) {
      auto names = encoder_.parameter_names();
      names.push_back("score.w");
      return names;
    }
    auto names = mention_encoder_.parameter_names();
    auto entity = entity_encoder_.parameter_names();
    names.insert(names.end(), entity.begin(), entity.end());
    return names;
  }

  // Copies pretrained encoder tensors (prefix "enc.") into this model's
  // encoder(s). Scoring heads keep their fresh initialization. Both towers of
  // the two-encoder architectures start from the same pretrained weights.
  void init_from_pretrained(const autodiff::RawCheckpoint& raw) {
    std::size_t copied = 0;
    for (auto& [name, tensor] : params_) {
      std::string source;
      if (name.rfind("enc.", 0) == 0) {
        source = name;
      } else if (name.rfind("m_enc.", 0) == 0) {
        source = "enc." + name.substr(6);
      } else if (name.rfind("e_enc.", 0) == 0) {
        source = "enc." + name.substr(6);
      } else {
        continue;
      }
      auto it = raw.find(source);
      if (it == raw.end())
        throw ValidationError("pretrained checkpoint is missing '" + source + "'");
      if (it->second.shape != tensor.shape())
        throw ValidationError("pretrained parameter '" + source + "' has shape " +
                              autodiff::shape_str(it->second.shape) + ", expected " +
                              autodiff::shape_str(tensor.shape()));
      auto& values = tensor.mutable_values();
      for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = static_cast<T>(it->second.values[i]);
      ++copied;
    }
    if (copied == 0) throw ValidationError("pretrained checkpoint matched no parameters");
  }

  // ---- scoring ----

  autodiff::Tensor<T> score_full(const corpus::Mention& mention, const corpus::Entity& entity,
                                 const Vocab& vocab) {
    require_arch(Arch::Full, "score_full");
    auto packed = pack_full(mention, entity, vocab, cfg_.max_segment_len);
    auto h = encoder_.encode(params_, packed);
    return autodiff::dot(params_.at("score.w"), h);
  }

  autodiff::Tensor<T> score_pool(const corpus::Mention& mention, const corpus::Entity& entity,
                                 const Vocab& vocab) {
    require_arch(Arch::Pool, "score_pool");
    auto hm = mention_encoder_.encode(
        params_, pack_mention_single(mention, vocab, cfg_.max_segment_len));
    auto he = entity_encoder_.encode(
        params_, pack_entity_single(entity, vocab, cfg_.max_segment_len));
    return autodiff::dot(hm, he);
  }

  // Entity representation attends over mention-side token states:
  // a = sum_j softmax_j(h_e . t_j / sqrt(H)) t_j, score = h_e . a
  autodiff::Tensor<T> score_cand_pool(const corpus::Mention& mention,
                                      const corpus::Entity& entity, const Vocab& vocab) {
    require_arch(Arch::CandPool, "score_cand_pool");
    namespace ad = autodiff;
    auto packed_m = pack_mention_single(mention, vocab, cfg_.max_segment_len);
    auto tokens = mention_encoder_.forward(params_, packed_m);
    // only real positions participate in the attention
    std::vector<std::size_t> real;
    for (std::size_t i = 0; i < packed_m.length(); ++i)
      if (packed_m.attention_mask[i]) real.push_back(i);
    auto t = ad::gather_rows(tokens, real);
    auto he = entity_encoder_.encode(
        params_, pack_entity_single(entity, vocab, cfg_.max_segment_len));

    const T scl = static_cast<T>(1.0 / std::sqrt(static_cast<double>(cfg_.hidden)));
    auto logits = ad::scale(ad::matvec(t, he), scl);
    auto attn = ad::softmax(logits);
    auto context = ad::matvec(ad::transpose(t), attn);
    return ad::dot(he, context);
  }

  autodiff::Tensor<T> score(const corpus::Mention& mention, const corpus::Entity& entity,
                            const Vocab& vocab) {
    switch (cfg_.arch) {
      case Arch::Full: return score_full(mention, entity, vocab);
      case Arch::Pool: return score_pool(mention, entity, vocab);
      case Arch::CandPool: return score_cand_pool(mention, entity, vocab);
    }
    throw ContractError("unreachable architecture");
  }

  // Joint scores over a mention's candidate list, in candidate order.
  autodiff::Tensor<T> score_candidates(const corpus::Mention& mention,
                                       const std::vector<const corpus::Entity*>& candidates,
                                       const Vocab& vocab) {
    if (candidates.empty()) throw ContractError("score_candidates: empty candidate list");
    std::vector<autodiff::Tensor<T>> scores;
    scores.reserve(candidates.size());
    for (const auto* e : candidates) scores.push_back(score(mention, *e, vocab));
    return autodiff::concat_vec(scores);
  }

  // Inference: no tape, argmax with lowest-index tie-break. An empty
  // candidate list yields an abstain marker.
  RankedPrediction predict(const corpus::Mention& mention,
                           const std::vector<const corpus::Entity*>& candidates,
                           const Vocab& vocab) {
    RankedPrediction pred;
    pred.mention_id = mention.mention_id;
    if (candidates.empty()) return pred;
    autodiff::NoGradGuard guard;
    auto scores = score_candidates(mention, candidates, vocab);
    std::size_t best = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double s = static_cast<double>(scores.values()[i]);
      pred.scores.push_back(s);
      if (s > pred.scores[best]) best = i;
    }
    pred.argmax = best;
    pred.predicted_entity_id = candidates[best]->entity_id;
    return pred;
  }

  Encoder<T>& encoder() { return encoder_; }
  Encoder<T>& mention_encoder() { return mention_encoder_; }
  Encoder<T>& entity_encoder() { return entity_encoder_; }

 private:
  void require_arch(Arch expected, const char* fn) const {
    if (cfg_.arch != expected)
      throw ContractError(std::string(fn) + " called on a " + to_string(cfg_.arch) + " model");
  }

  RankerConfig cfg_;
  autodiff::ParameterStore<T> params_;
  Encoder<T> encoder_;          // Full
  Encoder<T> mention_encoder_;  // Pool / CandPool
  Encoder<T> entity_encoder_;
};

}  // namespace zel::ranker
