#include <gtest/gtest.h>

#include <json.hpp>

#include "folio/export.hpp"
#include "folio/ontology.hpp"
#include "folio/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace folio;
using nlohmann::json;

namespace {

json expected_tree() { return json::parse(read_file(fixtures::source_path("tests/fixtures/ontology_expected.json"))); }

const char* kTiny = R"({
  "nodes": [{"name": "B", "parent": "A"}, {"name": "A"}, {"name": "C", "parent": "B"}],
  "mappings": [{"corpus": "endp", "tag": "t", "target": "C"}],
  "phrases": {"t": "a tiny tag"}
})";

}  // namespace

TEST(OntologyConfig, ShippedFileMatchesBuiltIn) {
  const Ontology file = load_ontology(read_file(fixtures::source_path("config/ontology.json")));
  const Ontology& builtin = default_ontology();
  EXPECT_EQ(file.nodes(), builtin.nodes());
  EXPECT_EQ(file.mappings(), builtin.mappings());
  EXPECT_EQ(file.phrases(), builtin.phrases());
}

TEST(OntologyConfig, TopLevelParents) {
  const json e = expected_tree();
  std::vector<std::string> roots;
  for (const OntologyNode& n : default_ontology().nodes()) {
    if (!n.parent) roots.push_back(n.name);
  }
  EXPECT_EQ(roots, e["level1"].get<std::vector<std::string>>());
}

TEST(OntologyConfig, EveryNodeHasExpectedParent) {
  const json e = expected_tree();
  const auto parents = e["parents"].get<std::map<std::string, std::string>>();
  const Ontology& o = default_ontology();
  EXPECT_EQ(o.nodes().size(), parents.size() + e["level1"].size());
  for (const auto& [child, parent] : parents) {
    ASSERT_TRUE(o.contains(child)) << child;
    ASSERT_TRUE(o.node(child).parent.has_value()) << child;
    EXPECT_EQ(*o.node(child).parent, parent) << child;
  }
}

TEST(OntologyConfig, CorpusMarkersPerLeaf) {
  const json e = expected_tree();
  std::map<std::string, std::set<std::string>> actual;
  for (const TagMapping& m : default_ontology().mappings()) actual[m.target].insert(std::string(to_string(m.corpus)));
  std::map<std::string, std::set<std::string>> want;
  for (const auto& [leaf, corpora] : e["markers"].items()) {
    for (const auto& c : corpora) want[leaf].insert(c.get<std::string>());
  }
  EXPECT_EQ(actual, want);
}

TEST(OntologyConfig, TagPaths) {
  const json e = expected_tree();
  const Ontology& o = default_ontology();
  EXPECT_EQ(o.mappings().size(), e["tag_paths"].size());
  for (const json& t : e["tag_paths"]) {
    const CorpusId c = parse_corpus_id(t["corpus"].get<std::string>());
    const LabelPath p = map_tag(o, c, t["tag"].get<std::string>());
    EXPECT_EQ(p.labels, t["path"].get<std::vector<std::string>>()) << t["tag"];
  }
}

TEST(OntologyConfig, LevelsFollowDepth) {
  for (const OntologyNode& n : default_ontology().nodes()) {
    EXPECT_EQ(static_cast<std::size_t>(n.level), default_ontology().path(n.name).depth()) << n.name;
  }
}

TEST(Ontology, DeclarationOrderIndependentOfParentOrder) {
  const Ontology o = load_ontology(kTiny);
  EXPECT_EQ(o.node("C").level, 3);
  EXPECT_EQ(o.path("C").labels, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(o.position("A"), 1u);
  EXPECT_EQ(descriptive_phrase(o, "t"), "a tiny tag");
  EXPECT_EQ(descriptive_phrase(o, "u"), "u");
}

TEST(Ontology, SaveLoadRoundTrip) {
  const std::string text = save_ontology(default_ontology());
  const Ontology back = load_ontology(text);
  EXPECT_EQ(back.nodes(), default_ontology().nodes());
  EXPECT_EQ(back.mappings(), default_ontology().mappings());
  EXPECT_EQ(save_ontology(back), text);
}

TEST(Ontology, RejectsInvalidConfigs) {
  EXPECT_THROW(load_ontology("{"), OntologyError);
  EXPECT_THROW(load_ontology(R"({"mappings": []})"), OntologyError);
  EXPECT_THROW(load_ontology(R"({"nodes": [{"name": "A"}, {"name": "A"}]})"), OntologyError);
  EXPECT_THROW(load_ontology(R"({"nodes": [{"name": "A", "parent": "Z"}]})"), OntologyError);
  EXPECT_THROW(load_ontology(R"({"nodes": [{"name": "A", "parent": "B"}, {"name": "B", "parent": "A"}]})"),
               OntologyError);
  EXPECT_THROW(load_ontology(R"({"nodes": [{"name": "A"}],
      "mappings": [{"corpus": "endp", "tag": "t", "target": "Q"}]})"),
               OntologyError);
  EXPECT_THROW(load_ontology(R"({"nodes": [{"name": "A"}],
      "mappings": [{"corpus": "endp", "tag": "t", "target": "A"}, {"corpus": "endp", "tag": "t", "target": "A"}]})"),
               OntologyError);
  EXPECT_THROW(load_ontology(R"({"nodes": [{"name": "A"}],
      "mappings": [{"corpus": "rimes", "tag": "t", "target": "A"}]})"),
               OntologyError);
}

TEST(Ontology, SameTagDifferentCorporaAreDistinct) {
  const Ontology& o = default_ontology();
  EXPECT_TRUE(o.target(CorpusId::catmus, "MainZone").has_value());
  EXPECT_FALSE(o.target(CorpusId::horae, "MainZone").has_value());
  EXPECT_THROW(map_tag(o, CorpusId::horae, "MainZone"), DataError);
}

TEST(ExpandLabels, SimpleInitialGetsFullPath) {
  const CorpusDataset ds = expand_labels(fixtures::horae_mini(), default_ontology());
  for (const InstanceRecord& r : ds.images[0].instances) {
    ASSERT_TRUE(r.labels.has_value());
    if (r.source_tag == "Simple Initial") {
      EXPECT_EQ(r.labels->labels, (std::vector<std::string>{"Initial", "Initial_Manuscript", "Initial_Ms_Simple"}));
    }
  }
  EXPECT_TRUE(ds.is_label_expanded());
  for (const CategoryDef& c : ds.categories) {
    EXPECT_GT(c.level, 0);
    EXPECT_EQ(c.level, default_ontology().node(c.name).level);
  }
}

TEST(ExpandLabels, Idempotent) {
  const CorpusDataset once = expand_labels(fixtures::catmus_mini(), default_ontology());
  const CorpusDataset twice = expand_labels(once, default_ontology());
  ASSERT_EQ(once.categories.size(), twice.categories.size());
  for (std::size_t i = 0; i < once.categories.size(); ++i) {
    EXPECT_EQ(once.categories[i].name, twice.categories[i].name);
    EXPECT_EQ(once.categories[i].id, twice.categories[i].id);
  }
  for (std::size_t i = 0; i < once.images[0].instances.size(); ++i) {
    EXPECT_EQ(once.images[0].instances[i].labels->labels, twice.images[0].instances[i].labels->labels);
  }
}

TEST(ExpandLabels, UnmappedTagsListedTogether) {
  CorpusDataset ds = fixtures::endp_mini();
  ds.images[0].instances[0].source_tag = "Mystery";
  ds.images[0].instances[1].source_tag = "Enigma";
  try {
    expand_labels(ds, default_ontology());
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(endp, Mystery)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(endp, Enigma)"), std::string::npos) << msg;
  }
}

TEST(ExpandLabels, PhrasesAttachToLeafTags) {
  CorpusDataset ds = fixtures::catmus_mini();
  attach_phrases(ds, default_ontology());
  ASSERT_TRUE(ds.find_category("DropCapitalZone")->descriptive_phrase.has_value());
  EXPECT_EQ(*ds.find_category("DropCapitalZone")->descriptive_phrase, "ornate drop capital letter zone");
}

TEST(ExpandLabels, LevelCategoriesOfMergedMinis) {
  const CorpusDataset m =
      merge_corpora({fixtures::endp_mini(), fixtures::catmus_mini(), fixtures::horae_mini()}, default_ontology());
  EXPECT_EQ(level_categories(m, LabelLevel::at(1)),
            (std::vector<std::string>{"Text", "Decoration", "Initial", "Numbering", "Marks"}));
  const auto leaves = level_categories(m, LabelLevel::leaf());
  EXPECT_NE(std::find(leaves.begin(), leaves.end(), "Initial_Ms_Simple"), leaves.end());
  EXPECT_EQ(std::find(leaves.begin(), leaves.end(), "Initial"), leaves.end());
  for (const ImageRecord& im : m.images) {
    for (const InstanceRecord& r : im.instances) {
      const auto l1 = level_categories(m, LabelLevel::at(1));
      EXPECT_NE(std::find(l1.begin(), l1.end(), r.category(LabelLevel::at(1))), l1.end());
    }
  }
}
