#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_set>

#include "zel/common/errors.hpp"
#include "zel/corpus/io.hpp"
#include "zel/corpus/ops.hpp"
#include "zel/corpus/synthetic.hpp"
#include "zel/corpus/types.hpp"

using namespace zel;
using namespace zel::corpus;

namespace {

EntityDictionary make_dictionary(const std::vector<std::pair<std::string, std::string>>& entries) {
  EntityDictionary dict;
  dict.world_id = "w";
  for (const auto& [id, title] : entries) {
    dict.entities.push_back(Entity{id, title, "desc of " + title});
  }
  dict.rebuild_lookup();
  return dict;
}

Mention make_mention(const std::string& id, const std::string& text, const std::string& gold) {
  Mention m;
  m.mention_id = id;
  m.world_id = "w";
  m.doc_id = "d";
  m.mention_string = text;
  m.gold_entity_id = gold;
  return m;
}

}  // namespace

TEST_CASE("categorize_mention follows the rule precedence") {
  CHECK(categorize_mention("Batman", "Batman (Lego)") == MentionCategory::MultipleCategories);
  CHECK(categorize_mention("Agent", "The Agent") == MentionCategory::AmbiguousSubstring);
  CHECK(categorize_mention("Star Wars", "Star Wars") == MentionCategory::HighOverlap);
  CHECK(categorize_mention("her", "Audrey Fleming") == MentionCategory::LowOverlap);

  // matching is case-folded with whitespace normalized
  CHECK(categorize_mention("STAR  wars", "Star Wars") == MentionCategory::HighOverlap);
  // substring must sit on word boundaries
  CHECK(categorize_mention("her", "Together Again") == MentionCategory::LowOverlap);
  CHECK(categorize_mention("her", "With her Friends") == MentionCategory::AmbiguousSubstring);
  // parenthesized disambiguation beats the substring rule
  CHECK(categorize_mention("Batman", "Batman (x)") == MentionCategory::MultipleCategories);
}

TEST_CASE("extract_mentions on documents without links") {
  auto dict = make_dictionary({{"e1", "Alpha"}});
  Document doc{"d1", "w", "no links in this text at all", {}};
  auto result = extract_mentions(doc, dict, 8);
  CHECK(result.mentions.empty());
  CHECK(result.unresolved_links == 0);
  CHECK(result.rejected_spans == 0);
}

TEST_CASE("extract_mentions resolves spans, contexts and categories") {
  auto dict = make_dictionary({{"e1", "grey knight"}, {"e2", "white tower"}});
  //                0123456789012345678901234567890123456789
  const std::string text = "the grey knight rode to the white tower today";
  Document doc{"d1", "w", text, {}};
  doc.hyperlinks.push_back(Hyperlink{4, 15, "e1"});   // "grey knight"
  doc.hyperlinks.push_back(Hyperlink{28, 39, "e2"});  // "white tower"

  auto result = extract_mentions(doc, dict, 2);
  REQUIRE(result.mentions.size() == 2);

  const auto& m1 = result.mentions[0];
  CHECK(m1.mention_string == "grey knight");
  CHECK(m1.span_begin == 1);
  CHECK(m1.span_end == 3);
  CHECK(m1.left_context == std::vector<std::string>{"the"});
  CHECK(m1.right_context == std::vector<std::string>{"rode", "to"});
  CHECK(m1.gold_entity_id == "e1");
  CHECK(m1.category == MentionCategory::HighOverlap);

  const auto& m2 = result.mentions[1];
  CHECK(m2.mention_string == "white tower");
  CHECK(m2.left_context == std::vector<std::string>{"to", "the"});
  CHECK(m2.right_context == std::vector<std::string>{"today"});
}

TEST_CASE("extract_mentions rejects malformed spans and counts unresolved links") {
  auto dict = make_dictionary({{"e1", "Alpha"}});
  Document doc{"d1", "w", "Alpha beta", {}};
  doc.hyperlinks.push_back(Hyperlink{0, 5, "e1"});
  doc.hyperlinks.push_back(Hyperlink{0, 5, "ghost"});  // unresolvable
  doc.hyperlinks.push_back(Hyperlink{6, 999, "e1"});   // out of bounds
  doc.hyperlinks.push_back(Hyperlink{5, 5, "e1"});     // empty span

  auto result = extract_mentions(doc, dict, 4);
  CHECK(result.mentions.size() == 1);
  CHECK(result.unresolved_links == 1);
  CHECK(result.rejected_spans == 2);
}

TEST_CASE("extraction over a synthetic world matches link counts") {
  WorldSpec spec;
  spec.world_id = "syn";
  spec.token_prefix = "syn";
  spec.n_entities = 20;
  spec.n_docs = 50;
  spec.total_mentions = 115;
  spec.dangling_links = 5;
  World world = generate_world(spec, 99);

  // counting oracle: resolvable and dangling links straight off the documents
  std::size_t total_links = 0, resolvable = 0;
  for (const auto& d : world.documents) {
    total_links += d.hyperlinks.size();
    for (const auto& h : d.hyperlinks) {
      if (world.dictionary.find(h.entity_id) >= 0) ++resolvable;
    }
  }
  CHECK(total_links == 120);
  CHECK(resolvable == 115);

  std::size_t extracted = 0, unresolved = 0;
  for (const auto& d : world.documents) {
    auto result = extract_mentions(d, world.dictionary, 16);
    extracted += result.mentions.size();
    unresolved += result.unresolved_links;
    CHECK(result.rejected_spans == 0);
    // invariant: the mention string is the document slice at its span
    auto tokens = index::tokenize_spans(d.text, {.lowercase = false});
    for (const auto& m : result.mentions) {
      std::string joined;
      for (std::size_t i = m.span_begin; i < m.span_end; ++i) {
        if (i > m.span_begin) joined.push_back(' ');
        joined += tokens[i].text;
      }
      CHECK(m.mention_string == joined);
    }
  }
  CHECK(extracted == 115);
  CHECK(unresolved == 5);
}

TEST_CASE("downsample_easy leaves inputs without easy mentions alone") {
  auto dict = make_dictionary({{"e1", "Alpha"}});
  std::vector<Mention> mentions{make_mention("m1", "something else", "e1"),
                                make_mention("m2", "another", "e1")};
  auto out = downsample_easy(mentions, dict, 0.05, 7);
  REQUIRE(out.size() == 2);
  CHECK(out[0].mention_id == "m1");
  CHECK(out[1].mention_id == "m2");
}

TEST_CASE("downsample_easy hits the target fraction") {
  auto dict = make_dictionary({{"e1", "Alpha"}});
  std::vector<Mention> mentions;
  for (int i = 0; i < 95; ++i)
    mentions.push_back(make_mention("hard" + std::to_string(i), "not the title", "e1"));
  for (int i = 0; i < 100; ++i)
    mentions.push_back(make_mention("easy" + std::to_string(i), "Alpha", "e1"));

  auto out = downsample_easy(mentions, dict, 0.05, 13);
  std::size_t easy = 0, hard = 0;
  for (const auto& m : out) (is_easy_mention(m, dict) ? easy : hard)++;
  CHECK(hard == 95);  // non-easy mentions are never dropped
  CHECK(easy == 5);   // e / (95 + e) = 0.05  =>  e = 5

  // determinism per seed
  auto again = downsample_easy(mentions, dict, 0.05, 13);
  REQUIRE(again.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].mention_id == out[i].mention_id);

  auto different = downsample_easy(mentions, dict, 0.05, 14);
  bool same = different.size() == out.size();
  if (same) {
    for (std::size_t i = 0; i < out.size(); ++i)
      if (different[i].mention_id != out[i].mention_id) same = false;
  }
  CHECK_FALSE(same);  // seed matters
}

TEST_CASE("downsample_easy clamps and keeps order") {
  auto dict = make_dictionary({{"e1", "Alpha"}});
  std::vector<Mention> mentions;
  for (int i = 0; i < 10; ++i) mentions.push_back(make_mention("h" + std::to_string(i), "x", "e1"));
  mentions.push_back(make_mention("easy", "Alpha", "e1"));

  // fraction 1.0 keeps everything
  CHECK(downsample_easy(mentions, dict, 1.0, 1).size() == 11);
  // fraction 0 drops all easy mentions
  CHECK(downsample_easy(mentions, dict, 0.0, 1).size() == 10);
  CHECK_THROWS_AS(downsample_easy(mentions, dict, 1.5, 1), ConfigError);
}

TEST_CASE("category_proportions") {
  auto dict = make_dictionary({{"e1", "Alpha"}});
  std::vector<Mention> mentions;
  for (auto cat : {MentionCategory::HighOverlap, MentionCategory::MultipleCategories,
                   MentionCategory::AmbiguousSubstring, MentionCategory::LowOverlap}) {
    auto m = make_mention("m", "x", "e1");
    m.category = cat;
    mentions.push_back(m);
  }
  auto props = category_proportions(mentions);
  for (const auto& [cat, ratio] : props) CHECK(ratio == doctest::Approx(0.25));

  double sum = 0;
  for (const auto& [cat, ratio] : props) sum += ratio;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(category_proportions({}), ValidationError);
}

TEST_CASE("planted category counts survive generation and extraction") {
  WorldSpec spec;
  spec.world_id = "plant";
  spec.token_prefix = "pl";
  spec.n_entities = 24;
  spec.n_docs = 50;
  spec.n_high = 10;
  spec.n_multi = 56;
  spec.n_ambig = 16;
  spec.n_low = 118;
  spec.total_mentions = 200;
  spec.group_size = 1;   // heads unique: ambiguous pattern stays a substring
  spec.alias_share = 6;  // aliases collide but never match titles
  World world = generate_world(spec, 4242);

  std::map<MentionCategory, std::size_t> counts;
  std::vector<Mention> all;
  for (const auto& d : world.documents) {
    auto result = extract_mentions(d, world.dictionary, 16);
    for (auto& m : result.mentions) {
      ++counts[m.category];
      all.push_back(std::move(m));
    }
  }
  CHECK(counts[MentionCategory::HighOverlap] == 10);
  CHECK(counts[MentionCategory::MultipleCategories] == 56);
  CHECK(counts[MentionCategory::AmbiguousSubstring] == 16);
  CHECK(counts[MentionCategory::LowOverlap] == 118);

  auto props = category_proportions(all);
  CHECK(props[MentionCategory::HighOverlap] == doctest::Approx(0.05));
  CHECK(props[MentionCategory::MultipleCategories] == doctest::Approx(0.28));
  CHECK(props[MentionCategory::AmbiguousSubstring] == doctest::Approx(0.08));
  CHECK(props[MentionCategory::LowOverlap] == doctest::Approx(0.59));
}

namespace {

// three tiny worlds with controlled mention/entity usage
std::vector<World> split_fixture() {
  std::vector<World> worlds;
  for (int wi = 0; wi < 3; ++wi) {
    World w;
    w.world_id = "w" + std::to_string(wi);
    w.dictionary.world_id = w.world_id;
    for (int e = 0; e < 6; ++e) {
      w.dictionary.entities.push_back(
          Entity{"e" + std::to_string(e), "title " + std::to_string(e), "desc"});
    }
    w.dictionary.rebuild_lookup();
    // entity e gets e+1 mentions (e0 has 1, e5 has 6)
    int mid = 0;
    for (int e = 0; e < 6; ++e) {
      for (int k = 0; k <= e; ++k) {
        auto m = make_mention("m" + std::to_string(mid++), "text", "e" + std::to_string(e));
        m.world_id = w.world_id;
        w.mentions.push_back(m);
      }
    }
    worlds.push_back(std::move(w));
  }
  return worlds;
}

}  // namespace

TEST_CASE("build_splits assigns worlds and draws heldout sets") {
  auto worlds = split_fixture();
  std::map<std::string, Split> assignment{
      {"w0", Split::Train}, {"w1", Split::Val}, {"w2", Split::Test}};
  auto result = build_splits(worlds, assignment, 5, 17);
  const auto& s = result.splits;

  CHECK(s.train_worlds == std::vector<std::string>{"w0"});
  CHECK(s.val_worlds == std::vector<std::string>{"w1"});
  CHECK(s.test_worlds == std::vector<std::string>{"w2"});
  CHECK(s.heldout_seen.size() == 5);
  CHECK(s.heldout_unseen.size() <= 5);

  // heldout sets are disjoint
  std::set<std::string> seen(s.heldout_seen.begin(), s.heldout_seen.end());
  for (const auto& id : s.heldout_unseen) CHECK(seen.count(id) == 0);

  // brute-force recheck of the seen/unseen visibility predicates
  auto train = training_mentions(worlds, s);
  std::unordered_set<std::string> train_golds;
  for (const auto* m : train) train_golds.insert(m->gold_entity_id);

  std::unordered_set<std::string> heldout_ids(s.heldout_seen.begin(), s.heldout_seen.end());
  for (const auto& qid : s.heldout_seen) {
    auto [world_id, mention_id] = split_qualified_id(qid);
    CHECK(world_id == "w0");
    for (const auto& m : worlds[0].mentions) {
      if (m.mention_id == mention_id) CHECK(train_golds.count(m.gold_entity_id) == 1);
    }
  }
  for (const auto& qid : s.heldout_unseen) {
    auto [world_id, mention_id] = split_qualified_id(qid);
    for (const auto& m : worlds[0].mentions) {
      if (m.mention_id == mention_id) CHECK(train_golds.count(m.gold_entity_id) == 0);
    }
  }

  // training mentions exclude every heldout mention
  CHECK(train.size() == worlds[0].mentions.size() - s.heldout_seen.size() -
                            s.heldout_unseen.size());
}

TEST_CASE("build_splits reports infeasible heldout sizes") {
  auto worlds = split_fixture();
  std::map<std::string, Split> assignment{
      {"w0", Split::Train}, {"w1", Split::Val}, {"w2", Split::Test}};

  // no entity group fits into a size-0 budget; both sets come back smaller
  auto tight = build_splits(worlds, assignment, 0, 3);
  CHECK(tight.splits.heldout_seen.empty());
  CHECK(tight.splits.heldout_unseen.empty());

  auto huge = build_splits(worlds, assignment, 1000, 3);
  CHECK(huge.splits.heldout_seen.size() < 1000);
  CHECK_FALSE(huge.warnings.empty());

  std::map<std::string, Split> incomplete{{"w0", Split::Train}};
  CHECK_THROWS_AS(build_splits(worlds, incomplete, 5, 3), ConfigError);
}

TEST_CASE("heldout_unseen is empty when every entity must stay in training") {
  // single world, every entity has >= 2 mentions, budget of 1: no whole
  // entity group can move to the unseen heldout
  std::vector<World> worlds = {split_fixture()[0]};
  worlds[0].mentions.erase(worlds[0].mentions.begin());  // drop e0's single mention
  std::map<std::string, Split> assignment{{"w0", Split::Train}};
  auto result = build_splits(worlds, assignment, 1, 3);
  CHECK(result.splits.heldout_unseen.empty());
  bool warned = false;
  for (const auto& w : result.warnings) {
    if (w.find("heldout_unseen") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("world io round-trips through jsonl") {
  WorldSpec spec;
  spec.world_id = "io";
  spec.token_prefix = "io";
  spec.n_entities = 8;
  spec.n_docs = 4;
  World world = generate_world(spec, 5);
  for (const auto& d : world.documents) {
    auto r = extract_mentions(d, world.dictionary, 8);
    world.mentions.insert(world.mentions.end(), r.mentions.begin(), r.mentions.end());
  }

  auto dir = std::filesystem::temp_directory_path() / "zel_test_io" / world.world_id;
  std::filesystem::remove_all(dir.parent_path());
  save_world(world, dir);
  LoadReport report;
  World loaded = load_world(dir, &report);

  CHECK(loaded.world_id == world.world_id);
  CHECK(loaded.dictionary.entities.size() == world.dictionary.entities.size());
  CHECK(loaded.documents.size() == world.documents.size());
  REQUIRE(loaded.mentions.size() == world.mentions.size());
  for (std::size_t i = 0; i < world.mentions.size(); ++i) {
    CHECK(loaded.mentions[i].mention_id == world.mentions[i].mention_id);
    CHECK(loaded.mentions[i].mention_string == world.mentions[i].mention_string);
    CHECK(loaded.mentions[i].category == world.mentions[i].category);
  }
  CHECK(report.malformed_lines == 0);
  std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("splits manifest round-trips") {
  DatasetSplits s;
  s.train_worlds = {"a", "b"};
  s.val_worlds = {"c"};
  s.test_worlds = {"d"};
  s.heldout_seen = {"a/m1", "b/m2"};
  s.heldout_unseen = {"a/m3"};

  auto path = std::filesystem::temp_directory_path() / "zel_test_splits.json";
  save_splits(s, path);
  auto loaded = load_splits(path);
  CHECK(loaded.train_worlds == s.train_worlds);
  CHECK(loaded.val_worlds == s.val_worlds);
  CHECK(loaded.test_worlds == s.test_worlds);
  CHECK(loaded.heldout_seen == s.heldout_seen);
  CHECK(loaded.heldout_unseen == s.heldout_unseen);
  std::filesystem::remove(path);
}
