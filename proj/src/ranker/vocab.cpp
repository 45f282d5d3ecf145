#include "zel/ranker/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "zel/common/errors.hpp"
#include "zel/common/hash.hpp"

namespace zel::ranker {

namespace {
const char* kSpecialNames[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
}

Vocab Vocab::build(const std::vector<const corpus::World*>& worlds,
                   const index::TokenizerConfig& cfg, std::size_t max_size) {
  if (max_size <= kNumSpecials)
    throw ConfigError("vocab max_size must exceed the " + std::to_string(kNumSpecials) +
                      " special tokens");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto* world : worlds) {
    for (const auto& doc : world->documents) {
      for (auto& tok : index::tokenize(doc.text, cfg)) ++freq[tok];
    }
    for (const auto& e : world->dictionary.entities) {
      for (auto& tok : index::tokenize(e.title + " " + e.description, cfg)) ++freq[tok];
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> ordered(freq.begin(), freq.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab vocab;
  vocab.cfg_ = cfg;
  for (const auto* name : kSpecialNames) vocab.tokens_.emplace_back(name);
  for (const auto& [token, count] : ordered) {
    if (vocab.tokens_.size() >= max_size) break;
    vocab.tokens_.push_back(token);
  }
  vocab.finish_build();
  return vocab;
}

void Vocab::finish_build() {
  ids_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = i;
}

std::size_t Vocab::id_folded(const std::string& token) const {
  if (!cfg_.lowercase) return id(token);
  std::string folded = token;
  for (char& c : folded) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return id(folded);
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write vocab file " + path.string());
  out << "lowercase " << (cfg_.lowercase ? 1 : 0) << " min_token_len " << cfg_.min_token_len
      << '\n';
  for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("vocab file not found: " + path.string());
  Vocab vocab;
  std::string keyword;
  int lowercase = 1;
  std::size_t min_len = 1;
  in >> keyword >> lowercase >> keyword >> min_len;
  in.ignore();  // trailing newline
  vocab.cfg_.lowercase = lowercase != 0;
  vocab.cfg_.min_token_len = min_len;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) vocab.tokens_.push_back(line);
  }
  if (vocab.tokens_.size() < kNumSpecials)
    throw ValidationError("vocab file " + path.string() + " is truncated");
  vocab.finish_build();
  return vocab;
}

std::uint64_t Vocab::content_hash() const {
  std::string blob = std::to_string(cfg_.lowercase ? 1 : 0) + "|" +
                     std::to_string(cfg_.min_token_len);
  for (const auto& t : tokens_) {
    blob += '\n';
    blob += t;
  }
  return fnv1a64(blob);
}

}  // namespace zel::ranker
