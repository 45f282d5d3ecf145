#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "zel/corpus/types.hpp"
#include "zel/index/tokenizer.hpp"

namespace zel::ranker {

// Frequency-capped token vocabulary for the neural side. Ids 0..4 are the
// special tokens; regular tokens follow in (frequency desc, token asc) order
// so construction is deterministic.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kCls = 2;
  static constexpr std::size_t kSep = 3;
  static constexpr std::size_t kMask = 4;
  static constexpr std::size_t kNumSpecials = 5;

  // Counts tokens over world documents and entity texts (title + description).
  static Vocab build(const std::vector<const corpus::World*>& worlds,
                     const index::TokenizerConfig& cfg, std::size_t max_size);

  std::size_t id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }

  // id for a token already split by the tokenizer; applies the tokenizer's
  // case rule before lookup
  std::size_t id_folded(const std::string& token) const;

  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const index::TokenizerConfig& tokenizer() const { return cfg_; }

  bool is_special(std::size_t id) const { return id < kNumSpecials; }

  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  // FNV-1a over the saved representation; embedded in checkpoints
  std::uint64_t content_hash() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
  index::TokenizerConfig cfg_;

  void finish_build();
};

}  // namespace zel::ranker
