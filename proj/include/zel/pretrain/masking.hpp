#pragma once

#include <cstdint>
#include <vector>

#include "zel/common/rng.hpp"
#include "zel/pretrain/segments.hpp"

namespace zel::pretrain {

struct MaskingConfig {
  double mask_prob = 0.15;
  double replace_mask = 0.8;    // selected position becomes [MASK]
  double replace_random = 0.1;  // selected position becomes a random token
  double keep = 0.1;            // selected position is left unchanged
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// One segment with mask perturbations applied. Labels exist exactly at the
// selected positions and record the original token ids.
struct MaskedSegment {
  std::vector<std::size_t> input_ids;
  std::vector<std::size_t> label_positions;
  std::vector<std::size_t> label_ids;
};

// Selection is an independent coin per position, so the selected fraction
// concentrates around mask_prob. Random replacements draw from the regular
// (non-special) vocab range.
MaskedSegment mask_segment(const Segment& segment, const MaskingConfig& cfg,
                           std::size_t vocab_size, Rng& rng);

std::vector<MaskedSegment> mask_batch(const std::vector<const Segment*>& segments,
                                      const MaskingConfig& cfg, std::size_t vocab_size, Rng& rng);

}  // namespace zel::pretrain
