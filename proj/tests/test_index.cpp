#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "zel/common/errors.hpp"
#include "zel/common/rng.hpp"
#include "zel/corpus/ops.hpp"
#include "zel/corpus/synthetic.hpp"
#include "zel/index/index.hpp"
#include "zel/index/tokenizer.hpp"

using namespace zel;
using namespace zel::index;
using zel::corpus::Entity;
using zel::corpus::EntityDictionary;
using zel::corpus::Mention;
using zel::corpus::World;

namespace {

EntityDictionary dict_of(const std::vector<std::pair<std::string, std::string>>& entries) {
  EntityDictionary dict;
  dict.world_id = "w";
  for (const auto& [id, text] : entries) {
    // title empty on purpose: the index treats title + description as one document
    dict.entities.push_back(Entity{id, "", text});
  }
  dict.rebuild_lookup();
  return dict;
}

Mention query_mention(const std::string& text) {
  Mention m;
  m.mention_id = "q";
  m.mention_string = text;
  return m;
}

// independent reference splitter: character-class state machine over the
// same "alphanumeric or >= 0x80" definition, written differently on purpose
std::vector<std::string> reference_split(const std::string& text, bool lowercase) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                      (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      cur.push_back(lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                                      : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("tokenize basics") {
  TokenizerConfig cfg;
  CHECK(tokenize("", cfg).empty());
  CHECK(tokenize("Star Wars!", cfg) == std::vector<std::string>{"star", "wars"});
  CHECK(tokenize("a,b;c", cfg) == std::vector<std::string>{"a", "b", "c"});

  TokenizerConfig keep_case{.lowercase = false};
  CHECK(tokenize("Star Wars!", keep_case) == std::vector<std::string>{"Star", "Wars"});

  TokenizerConfig min2{.lowercase = true, .min_token_len = 2};
  CHECK(tokenize("a bb ccc", min2) == std::vector<std::string>{"bb", "ccc"});

  // spans point at the original bytes
  auto spans = tokenize_spans("Star Wars!", cfg);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].begin == 0);
  CHECK(spans[0].end == 4);
  CHECK(spans[1].begin == 5);
  CHECK(spans[1].end == 9);
}

TEST_CASE("tokenize agrees with an independent splitter on a large document") {
  Rng rng(101);
  std::ostringstream doc;
  const std::vector<std::string> seps{" ", ", ", "; ", "\n", " -- ", "... "};
  for (int i = 0; i < 1000; ++i) {
    doc << "Tok" << rng.uniform_u64(500) << seps[rng.uniform_index(seps.size())];
  }
  const std::string text = doc.str();

  TokenizerConfig cfg;
  auto ours = tokenize(text, cfg);
  auto ref = reference_split(text, true);
  REQUIRE(ours.size() == ref.size());
  CHECK(ours == ref);
}

TEST_CASE("build_index counts postings and lengths") {
  auto dict = dict_of({{"e1", "a a b"}});
  auto idx = InvertedIndex::build(dict, {});
  CHECK(idx.num_entities() == 1);
  CHECK(idx.avg_doc_length() == doctest::Approx(3.0));
  CHECK(idx.document_frequency("a") == 1);
  CHECK(idx.document_frequency("b") == 1);
  CHECK(idx.document_frequency("zzz") == 0);
  CHECK(idx.score({"a"}, 0, {}) > 0.0);

  CHECK_THROWS_AS(InvertedIndex::build(EntityDictionary{}, {}), ConfigError);
}

TEST_CASE("build_index flags empty documents") {
  EntityDictionary dict;
  dict.world_id = "w";
  dict.entities.push_back(Entity{"e1", "", ""});
  dict.entities.push_back(Entity{"e2", "", "some words"});
  dict.rebuild_lookup();
  auto idx = InvertedIndex::build(dict, {});
  CHECK(idx.empty_documents() == 1);
  CHECK(idx.doc_length(0) == 0);
  CHECK(idx.score({"some"}, 0, {}) == 0.0);
}

TEST_CASE("document frequencies match brute-force counts on a synthetic dictionary") {
  corpus::WorldSpec spec;
  spec.world_id = "df";
  spec.token_prefix = "df";
  spec.n_entities = 200;
  spec.n_docs = 1;
  spec.total_mentions = 4;
  World world = corpus::generate_world(spec, 7);

  TokenizerConfig cfg;
  auto idx = InvertedIndex::build(world.dictionary, cfg);

  std::map<std::string, std::size_t> brute;
  for (const auto& e : world.dictionary.entities) {
    std::set<std::string> uniq;
    for (const auto& t : tokenize(e.title + " " + e.description, cfg)) uniq.insert(t);
    for (const auto& t : uniq) ++brute[t];
  }
  CHECK(idx.num_terms() == brute.size());
  for (const auto& [term, df] : brute) CHECK(idx.document_frequency(term) == df);
}

TEST_CASE("bm25 score matches the closed form on a single-term query") {
  auto dict = dict_of({{"e1", "apple banana"}});
  auto idx = InvertedIndex::build(dict, {});
  BM25Params params;  // k1 = 1.2, b = 0.75

  // independent scalar evaluation of the formula
  const double N = 1, df = 1, tf = 1, dl = 2, avgdl = 2;
  const double idf = std::log(1.0 + (N - df + 0.5) / (df + 0.5));
  const double expected =
      idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * dl / avgdl));

  CHECK(idx.score({"apple"}, 0, params) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));

  // absent terms contribute zero
  CHECK(idx.score({"cherry"}, 0, params) == 0.0);
  CHECK(idx.score({"cherry", "apple"}, 0, params) ==
        doctest::Approx(expected).epsilon(1e-12));
  // repeated query terms are deduplicated
  CHECK(idx.score({"apple", "apple"}, 0, params) == idx.score({"apple"}, 0, params));
}

TEST_CASE("identical documents score identically") {
  auto dict = dict_of({{"e1", "same words here"}, {"e2", "same words here"}, {"e3", "other"}});
  auto idx = InvertedIndex::build(dict, {});
  CHECK(idx.score({"same", "words"}, 0, {}) == idx.score({"same", "words"}, 1, {}));
}

TEST_CASE("retrieve returns every entity when k exceeds K") {
  auto dict = dict_of({{"e1", "alpha beta"}, {"e2", "alpha gamma"}, {"e3", "delta"}});
  auto idx = InvertedIndex::build(dict, {});
  auto m = query_mention("alpha");
  m.gold_entity_id = "e2";
  auto cs = idx.retrieve(m, {}, {.k = 64});
  REQUIRE(cs.candidates.size() == 3);
  CHECK(cs.gold_in_set);
  // e3 scores zero and sorts last
  CHECK(cs.candidates.back().first == "e3");
  CHECK(cs.candidates.back().second == 0.0);
  // scores non-increasing
  for (std::size_t i = 1; i < cs.candidates.size(); ++i)
    CHECK(cs.candidates[i - 1].second >= cs.candidates[i].second);
}

TEST_CASE("retrieve on an empty-tokenizing mention yields an empty set") {
  auto dict = dict_of({{"e1", "alpha"}});
  auto idx = InvertedIndex::build(dict, {});
  auto m = query_mention("!!!");
  m.gold_entity_id = "e1";
  auto cs = idx.retrieve(m, {}, {.k = 4});
  CHECK(cs.candidates.empty());
  CHECK_FALSE(cs.gold_in_set);
}

TEST_CASE("retrieve equals brute-force score-all-then-sort") {
  corpus::WorldSpec spec;
  spec.world_id = "bf";
  spec.token_prefix = "bf";
  spec.n_entities = 100;
  spec.group_size = 5;
  spec.n_docs = 10;
  spec.pool_size = 60;
  World world = corpus::generate_world(spec, 21);

  TokenizerConfig cfg;
  auto idx = InvertedIndex::build(world.dictionary, cfg);
  BM25Params params;
  RetrievalConfig retrieval{.k = 16};

  std::size_t checked = 0;
  for (const auto& d : world.documents) {
    auto extracted = corpus::extract_mentions(d, world.dictionary, 8);
    for (const auto& m : extracted.mentions) {
      auto cs = idx.retrieve(m, params, retrieval);

      // oracle: score every entity independently, sort with the same order
      auto query = tokenize(m.mention_string, cfg);
      std::vector<std::pair<std::string, double>> all;
      for (std::size_t ord = 0; ord < idx.num_entities(); ++ord) {
        all.emplace_back(idx.entity_ids()[ord], idx.score(query, ord, params));
      }
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      all.resize(std::min<std::size_t>(retrieval.k, all.size()));

      REQUIRE(cs.candidates.size() == all.size());
      for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(cs.candidates[i].first == all[i].first);
        CHECK(cs.candidates[i].second == doctest::Approx(all[i].second).epsilon(1e-9));
      }
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("a uniquely-titled mention ranks its entity first") {
  auto dict = dict_of({{"e1", "zyxwv unique title words"},
                       {"e2", "common words everywhere"},
                       {"e3", "more common words"}});
  auto idx = InvertedIndex::build(dict, {});
  auto m = query_mention("zyxwv unique title");
  m.gold_entity_id = "e1";
  auto cs = idx.retrieve(m, {}, {.k = 3});
  REQUIRE_FALSE(cs.candidates.empty());
  CHECK(cs.candidates[0].first == "e1");
  CHECK(cs.gold_rank == 0);
  // strictly maximal: unique terms give e1 strictly more score mass
  CHECK(cs.candidates[0].second > cs.candidates[1].second);
}

TEST_CASE("recall_at_k") {
  auto with_gold = [](bool in) {
    CandidateSet cs;
    cs.gold_in_set = in;
    return cs;
  };
  CHECK(recall_at_k({with_gold(true), with_gold(true)}) == doctest::Approx(1.0));
  CHECK(recall_at_k({with_gold(true), with_gold(true), with_gold(true), with_gold(false)}) ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(recall_at_k({}), ValidationError);
}

TEST_CASE("recall is non-decreasing in k and reaches 1 at k >= K") {
  corpus::WorldSpec spec;
  spec.world_id = "mono";
  spec.token_prefix = "mono";
  spec.n_entities = 30;
  spec.group_size = 3;
  spec.n_docs = 6;
  World world = corpus::generate_world(spec, 33);

  auto idx = InvertedIndex::build(world.dictionary, {});
  std::vector<Mention> mentions;
  for (const auto& d : world.documents) {
    auto r = corpus::extract_mentions(d, world.dictionary, 8);
    mentions.insert(mentions.end(), r.mentions.begin(), r.mentions.end());
  }
  REQUIRE_FALSE(mentions.empty());

  double prev = 0.0;
  for (std::size_t k : {1ul, 2ul, 4ul, 8ul, 16ul, 30ul, 64ul}) {
    std::vector<CandidateSet> sets;
    for (const auto& m : mentions) sets.push_back(idx.retrieve(m, {}, {.k = k}));
    const double r = recall_at_k(sets);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == doctest::Approx(1.0));  // k >= K and every gold is indexed
}

TEST_CASE("index serialization round-trips byte-identically") {
  corpus::WorldSpec spec;
  spec.world_id = "ser";
  spec.token_prefix = "ser";
  spec.n_entities = 40;
  spec.n_docs = 4;
  World world = corpus::generate_world(spec, 11);
  auto idx = InvertedIndex::build(world.dictionary, {});

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "zel_test_index";
  fs::create_directories(dir);
  const auto p1 = dir / "a.idx";
  const auto p2 = dir / "b.idx";
  idx.save(p1, 0xabcdef12345678ULL);

  std::uint64_t hash = 0;
  auto loaded = InvertedIndex::load(p1, &hash);
  CHECK(hash == 0xabcdef12345678ULL);
  CHECK(loaded.num_entities() == idx.num_entities());
  CHECK(loaded.avg_doc_length() == idx.avg_doc_length());
  CHECK(loaded.num_terms() == idx.num_terms());

  // identical corpus + config -> bit-identical serialized index
  loaded.save(p2, 0xabcdef12345678ULL);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());

  // a loaded index answers queries identically
  auto m = query_mention(world.dictionary.entities[3].title);
  m.gold_entity_id = world.dictionary.entities[3].entity_id;
  auto a = idx.retrieve(m, {}, {.k = 8});
  auto b = loaded.retrieve(m, {}, {.k = 8});
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].first == b.candidates[i].first);
    CHECK(a.candidates[i].second == b.candidates[i].second);
  }
  fs::remove_all(dir);
}

TEST_CASE("loading a mismatched index version fails hard") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "zel_test_badidx";
  fs::create_directories(dir);
  const auto path = dir / "bad.idx";
  {
    std::ofstream out(path, std::ios::binary);
    out.write("ZELINDX1", 8);
    const std::uint32_t bad_version = 999;
    out.write(reinterpret_cast<const char*>(&bad_version), 4);
  }
  CHECK_THROWS_AS(InvertedIndex::load(path), ValidationError);
  {
    std::ofstream out(path, std::ios::binary);
    out.write("NOTANIDX", 8);
  }
  CHECK_THROWS_AS(InvertedIndex::load(path), ValidationError);
  CHECK_THROWS_AS(InvertedIndex::load(dir / "missing.idx"), MissingArtifactError);
  fs::remove_all(dir);
}
