#include "zel/index/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "zel/common/binio.hpp"
#include "zel/common/errors.hpp"

namespace zel::index {

namespace {

constexpr char kMagic[8] = {'Z', 'E', 'L', 'I', 'N', 'D', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

// unique terms in first-occurrence order; keeps score() and retrieve()
// accumulation orders identical
std::vector<std::string> unique_terms(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const auto& t : tokens) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

}  // namespace

InvertedIndex InvertedIndex::build(const corpus::EntityDictionary& dictionary,
                                   const TokenizerConfig& cfg) {
  if (dictionary.entities.empty())
    throw ConfigError("cannot build an index over an empty entity dictionary");

  InvertedIndex idx;
  idx.world_id_ = dictionary.world_id;
  idx.tokenizer_ = cfg;
  idx.doc_lengths_.reserve(dictionary.entities.size());
  idx.entity_ids_.reserve(dictionary.entities.size());

  std::uint64_t total_len = 0;
  for (std::size_t ord = 0; ord < dictionary.entities.size(); ++ord) {
    const auto& e = dictionary.entities[ord];
    const auto tokens = tokenize(e.title + " " + e.description, cfg);
    if (tokens.empty()) ++idx.empty_documents_;

    std::unordered_map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, freq] : tf) {
      idx.postings_[term].push_back(Posting{static_cast<std::uint32_t>(ord), freq});
    }
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    idx.entity_ids_.push_back(e.entity_id);
    total_len += tokens.size();
  }
  // postings were appended in ascending ordinal order already
  idx.avg_doc_length_ =
      static_cast<double>(total_len) / static_cast<double>(dictionary.entities.size());
  return idx;
}

double InvertedIndex::score(const std::vector<std::string>& query_tokens,
                            std::size_t entity_ordinal, const BM25Params& params) const {
  const double N = static_cast<double>(num_entities());
  double total = 0.0;
  for (const auto& term : unique_terms(query_tokens)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const auto& plist = it->second;
    const auto pit = std::lower_bound(
        plist.begin(), plist.end(), entity_ordinal,
        [](const Posting& p, std::size_t ord) { return p.entity_ordinal < ord; });
    if (pit == plist.end() || pit->entity_ordinal != entity_ordinal) continue;

    const double df = static_cast<double>(plist.size());
    const double idf = std::log(1.0 + (N - df + 0.5) / (df + 0.5));
    const double tf = static_cast<double>(pit->tf);
    const double dl = static_cast<double>(doc_lengths_[entity_ordinal]);
    const double denom = tf + params.k1 * (1.0 - params.b + params.b * dl / avg_doc_length_);
    total += idf * tf * (params.k1 + 1.0) / denom;
  }
  return total;
}

CandidateSet InvertedIndex::retrieve(const corpus::Mention& mention, const BM25Params& params,
                                     const RetrievalConfig& retrieval) const {
  CandidateSet result;
  result.mention_id = mention.mention_id;

  std::string query_text;
  if (retrieval.query_with_context) {
    for (const auto& t : mention.left_context) query_text += t + " ";
    query_text += mention.mention_string;
    for (const auto& t : mention.right_context) query_text += " " + t;
  } else {
    query_text = mention.mention_string;
  }
  const auto query = tokenize(query_text, tokenizer_);
  if (query.empty()) return result;

  const double N = static_cast<double>(num_entities());
  std::vector<double> scores(num_entities(), 0.0);
  for (const auto& term : unique_terms(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf = std::log(1.0 + (N - df + 0.5) / (df + 0.5));
    for (const auto& p : it->second) {
      const double tf = static_cast<double>(p.tf);
      const double dl = static_cast<double>(doc_lengths_[p.entity_ordinal]);
      const double denom = tf + params.k1 * (1.0 - params.b + params.b * dl / avg_doc_length_);
      scores[p.entity_ordinal] += idf * tf * (params.k1 + 1.0) / denom;
    }
  }

  // All entities participate so that k >= K returns the full dictionary;
  // zero-score entities sort last in entity_id order.
  std::vector<std::size_t> matched(scores.size());
  for (std::size_t i = 0; i < matched.size(); ++i) matched[i] = i;
  std::sort(matched.begin(), matched.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return entity_ids_[a] < entity_ids_[b];
  });
  if (matched.size() > retrieval.k) matched.resize(retrieval.k);

  for (std::size_t rank = 0; rank < matched.size(); ++rank) {
    const auto ord = matched[rank];
    result.candidates.emplace_back(entity_ids_[ord], scores[ord]);
    if (entity_ids_[ord] == mention.gold_entity_id) {
      result.gold_in_set = true;
      result.gold_rank = rank;
    }
  }
  return result;
}

std::size_t InvertedIndex::document_frequency(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

void InvertedIndex::save(const std::filesystem::path& path, std::uint64_t config_hash) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write index file " + path.string());
  out.write(kMagic, sizeof(kMagic));
  binio::write_u32(out, kVersion);
  binio::write_u64(out, config_hash);
  binio::write_string(out, world_id_);
  binio::write_u8(out, tokenizer_.lowercase ? 1 : 0);
  binio::write_varint(out, tokenizer_.min_token_len);
  binio::write_u64(out, doc_lengths_.size());
  binio::write_f64(out, avg_doc_length_);
  binio::write_varint(out, empty_documents_);
  for (std::size_t i = 0; i < doc_lengths_.size(); ++i) {
    binio::write_string(out, entity_ids_[i]);
    binio::write_varint(out, doc_lengths_[i]);
  }
  binio::write_u64(out, postings_.size());
  for (const auto& [term, plist] : postings_) {
    binio::write_string(out, term);
    binio::write_varint(out, plist.size());
    std::uint32_t prev = 0;
    for (const auto& p : plist) {
      binio::write_varint(out, p.entity_ordinal - prev);  // delta, first is absolute
      binio::write_varint(out, p.tf);
      prev = p.entity_ordinal;
    }
  }
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path, std::uint64_t* config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("index file not found: " + path.string());

  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || !std::equal(magic, magic + 8, kMagic))
    throw ValidationError("not an index file: " + path.string());
  const auto version = binio::read_u32(in);
  if (version != kVersion)
    throw ValidationError("index version mismatch in " + path.string() + ": found " +
                          std::to_string(version) + ", expected " + std::to_string(kVersion));
  const auto hash = binio::read_u64(in);
  if (config_hash) *config_hash = hash;

  InvertedIndex idx;
  idx.world_id_ = binio::read_string(in);
  idx.tokenizer_.lowercase = binio::read_u8(in) != 0;
  idx.tokenizer_.min_token_len = binio::read_varint(in);
  const auto n = binio::read_u64(in);
  idx.avg_doc_length_ = binio::read_f64(in);
  idx.empty_documents_ = binio::read_varint(in);
  idx.doc_lengths_.reserve(n);
  idx.entity_ids_.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    idx.entity_ids_.push_back(binio::read_string(in));
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(binio::read_varint(in)));
  }
  const auto n_terms = binio::read_u64(in);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    auto term = binio::read_string(in);
    const auto n_postings = binio::read_varint(in);
    std::vector<Posting> plist;
    plist.reserve(n_postings);
    std::uint32_t prev = 0;
    for (std::uint64_t i = 0; i < n_postings; ++i) {
      const auto delta = static_cast<std::uint32_t>(binio::read_varint(in));
      const auto tf = static_cast<std::uint32_t>(binio::read_varint(in));
      prev += delta;
      plist.push_back(Posting{prev, tf});
    }
    idx.postings_.emplace(std::move(term), std::move(plist));
  }
  return idx;
}

double recall_at_k(const std::vector<CandidateSet>& candidate_sets) {
  if (candidate_sets.empty())
    throw ValidationError("recall_at_k: empty candidate set list");
  std::size_t hits = 0;
  for (const auto& cs : candidate_sets) {
    if (cs.gold_in_set) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(candidate_sets.size());
}

}  // namespace zel::index
