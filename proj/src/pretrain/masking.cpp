#include "zel/pretrain/masking.hpp"

#include <cmath>

#include "zel/common/errors.hpp"
#include "zel/ranker/vocab.hpp"

namespace zel::pretrain {

void MaskingConfig::validate() const {
  if (!(mask_prob > 0.0 && mask_prob < 1.0))
    throw ConfigError("mask_prob must lie strictly between 0 and 1");
  if (std::abs(replace_mask + replace_random + keep - 1.0) > 1e-9)
    throw ConfigError("mask replacement ratios must sum to 1");
}

MaskedSegment mask_segment(const Segment& segment, const MaskingConfig& cfg,
                           std::size_t vocab_size, Rng& rng) {
  MaskedSegment out;
  out.input_ids = segment;
  const std::size_t regular = vocab_size - ranker::Vocab::kNumSpecials;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    if (!rng.bernoulli(cfg.mask_prob)) continue;
    out.label_positions.push_back(i);
    out.label_ids.push_back(segment[i]);
    const double r = rng.uniform();
    if (r < cfg.replace_mask) {
      out.input_ids[i] = ranker::Vocab::kMask;
    } else if (r < cfg.replace_mask + cfg.replace_random) {
      out.input_ids[i] = ranker::Vocab::kNumSpecials + rng.uniform_index(regular);
    }
    // else: keep the original token; the label still counts
  }
  return out;
}

std::vector<MaskedSegment> mask_batch(const std::vector<const Segment*>& segments,
                                      const MaskingConfig& cfg, std::size_t vocab_size,
                                      Rng& rng) {
  cfg.validate();
  std::vector<MaskedSegment> out;
  out.reserve(segments.size());
  for (const auto* s : segments) out.push_back(mask_segment(*s, cfg, vocab_size, rng));
  return out;
}

}  // namespace zel::pretrain
