#pragma once

// Hierarchical codicological ontology: node tree, per-corpus tag mappings
// and descriptive phrases, loaded from a JSON document:
//
//   {"nodes":    [{"name": "Text"}, {"name": "Text_Main", "parent": "Text"}, ...],
//    "mappings": [{"corpus": "endp", "tag": "Primary Text Region", "target": "Text_Main"}, ...],
//    "phrases":  {"DropCapitalZone": "ornate drop capital letter zone", ...}}
//
// Nodes may be listed in any order; the declaration order is kept as the
// registry order of label-expanded datasets.

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "folio/corpus.hpp"

namespace folio {

class OntologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OntologyNode {
  std::string name;
  std::optional<std::string> parent;
  int level = 1;

  friend bool operator==(const OntologyNode&, const OntologyNode&) = default;
};

struct TagMapping {
  CorpusId corpus;
  std::string tag;
  std::string target;

  friend bool operator==(const TagMapping&, const TagMapping&) = default;
};

class Ontology {
 public:
  Ontology() = default;

  /// Validates and indexes. Throws OntologyError on duplicate names,
  /// unknown parents, cycles, duplicate or unresolved mappings.
  Ontology(std::vector<OntologyNode> nodes, std::vector<TagMapping> mappings,
           std::map<std::string, std::string> phrases)
      : nodes_(std::move(nodes)), mappings_(std::move(mappings)), phrases_(std::move(phrases)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].name.empty()) throw OntologyError("node with empty name");
      if (!index_.emplace(nodes_[i].name, i).second) {
        throw OntologyError("duplicate node name '" + nodes_[i].name + "'");
      }
    }
    for (const OntologyNode& n : nodes_) {
      if (n.parent && !index_.contains(*n.parent)) {
        throw OntologyError("node '" + n.name + "' has unknown parent '" + *n.parent + "'");
      }
    }
    for (OntologyNode& n : nodes_) n.level = compute_level(n.name);
    for (const TagMapping& m : mappings_) {
      if (!index_.contains(m.target)) {
        throw OntologyError("mapping (" + std::string(to_string(m.corpus)) + ", " + m.tag +
                            ") targets unknown node '" + m.target + "'");
      }
      if (!mapping_index_.emplace(std::pair{m.corpus, m.tag}, m.target).second) {
        throw OntologyError("duplicate mapping (" + std::string(to_string(m.corpus)) + ", " + m.tag + ")");
      }
    }
  }

  const std::vector<OntologyNode>& nodes() const { return nodes_; }
  const std::vector<TagMapping>& mappings() const { return mappings_; }
  const std::map<std::string, std::string>& phrases() const { return phrases_; }

  bool contains(std::string_view name) const { return index_.contains(std::string(name)); }

  const OntologyNode& node(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw OntologyError("unknown node '" + std::string(name) + "'");
    return nodes_[it->second];
  }

  /// Declaration-order position, used as a stable registry key.
  std::size_t position(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw OntologyError("unknown node '" + std::string(name) + "'");
    return it->second;
  }

  /// Root-to-node path of an ontology node.
  LabelPath path(std::string_view name) const {
    LabelPath p;
    const OntologyNode* n = &node(name);
    while (true) {
      p.labels.push_back(n->name);
      if (!n->parent) break;
      n = &node(*n->parent);
    }
    std::reverse(p.labels.begin(), p.labels.end());
    return p;
  }

  std::optional<std::string> target(CorpusId corpus, std::string_view tag) const {
    auto it = mapping_index_.find(std::pair{corpus, std::string(tag)});
    if (it == mapping_index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  int compute_level(const std::string& name) const {
    int level = 1;
    std::set<std::string> visited{name};
    const OntologyNode* n = &nodes_[index_.at(name)];
    while (n->parent) {
      if (!visited.insert(*n->parent).second) throw OntologyError("cycle through node '" + name + "'");
      n = &nodes_[index_.at(*n->parent)];
      ++level;
    }
    return level;
  }

  std::vector<OntologyNode> nodes_;
  std::vector<TagMapping> mappings_;
  std::map<std::string, std::string> phrases_;
  std::map<std::string, std::size_t> index_;
  std::map<std::pair<CorpusId, std::string>, std::string> mapping_index_;
};

inline Ontology load_ontology(std::string_view text) {
  using json = nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw OntologyError(std::string("malformed ontology JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw OntologyError("ontology config needs a 'nodes' array");
  }
  std::vector<OntologyNode> nodes;
  for (const json& n : doc["nodes"]) {
    if (!n.is_object() || !n.contains("name") || !n["name"].is_string()) {
      throw OntologyError("ontology node needs a string 'name'");
    }
    OntologyNode node{n["name"].get<std::string>(), std::nullopt, 1};
    if (auto p = n.find("parent"); p != n.end() && !p->is_null()) node.parent = p->get<std::string>();
    nodes.push_back(std::move(node));
  }
  std::vector<TagMapping> mappings;
  if (auto ms = doc.find("mappings"); ms != doc.end()) {
    for (const json& m : *ms) {
      if (!m.contains("corpus") || !m.contains("tag") || !m.contains("target")) {
        throw OntologyError("mapping needs corpus, tag and target");
      }
      try {
        mappings.push_back({parse_corpus_id(m["corpus"].get<std::string>()), m["tag"].get<std::string>(),
                            m["target"].get<std::string>()});
      } catch (const DataError& e) {
        throw OntologyError(e.what());
      }
    }
  }
  std::map<std::string, std::string> phrases;
  if (auto ps = doc.find("phrases"); ps != doc.end()) {
    phrases = ps->get<std::map<std::string, std::string>>();
  }
  return Ontology(std::move(nodes), std::move(mappings), std::move(phrases));
}

inline std::string save_ontology(const Ontology& o) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["nodes"] = json::array();
  for (const OntologyNode& n : o.nodes()) {
    json j{{"name", n.name}};
    if (n.parent) j["parent"] = *n.parent;
    doc["nodes"].push_back(std::move(j));
  }
  doc["mappings"] = json::array();
  for (const TagMapping& m : o.mappings()) {
    doc["mappings"].push_back({{"corpus", to_string(m.corpus)}, {"tag", m.tag}, {"target", m.target}});
  }
  doc["phrases"] = json::object();
  for (const auto& [tag, phrase] : o.phrases()) doc["phrases"][tag] = phrase;
  return doc.dump(2) + "\n";
}

/// Root-to-node path for a corpus tag. Throws DataError when unmapped.
inline LabelPath map_tag(const Ontology& o, CorpusId corpus, std::string_view tag) {
  auto target = o.target(corpus, tag);
  if (!target) {
    throw DataError("unmapped tag (" + std::string(to_string(corpus)) + ", " + std::string(tag) + ")");
  }
  return o.path(*target);
}

inline std::string descriptive_phrase(const Ontology& o, std::string_view tag) {
  auto it = o.phrases().find(std::string(tag));
  return it == o.phrases().end() ? std::string(tag) : it->second;
}

namespace detail {

// Registry of every node appearing on some instance path, in ontology order.
inline std::vector<CategoryDef> ontology_registry(const std::vector<ImageRecord>& images, const Ontology& o) {
  std::set<std::size_t> used;
  for (const ImageRecord& im : images) {
    for (const InstanceRecord& r : im.instances) {
      for (const std::string& l : r.labels->labels) used.insert(o.position(l));
    }
  }
  std::vector<CategoryDef> cats;
  for (std::size_t pos : used) {
    const OntologyNode& n = o.nodes()[pos];
    CategoryDef c;
    c.name = n.name;
    c.parent = n.parent;
    c.level = n.level;
    if (auto it = o.phrases().find(n.name); it != o.phrases().end()) c.descriptive_phrase = it->second;
    cats.push_back(std::move(c));
  }
  renumber_categories(cats);
  return cats;
}

}  // namespace detail

/// Every (corpus, tag) of `ds` without a mapping, formatted "(corpus, tag)".
inline std::set<std::string> unmapped_tags(const CorpusDataset& ds, const Ontology& o) {
  std::set<std::string> out;
  for (const ImageRecord& im : ds.images) {
    for (const InstanceRecord& r : im.instances) {
      if (r.labels) {
        for (const std::string& l : r.labels->labels) {
          if (!o.contains(l)) out.insert("(labels, " + l + ")");
        }
      } else if (!o.target(ds.corpus_id, r.source_tag)) {
        out.insert("(" + std::string(to_string(ds.corpus_id)) + ", " + r.source_tag + ")");
      }
    }
  }
  return out;
}

inline std::string unmapped_message(const std::set<std::string>& unmapped) {
  std::string msg = "unmapped tags:";
  for (const std::string& u : unmapped) msg += " " + u;
  return msg;
}

/// Attaches full label paths to every instance and replaces the category
/// registry by the ontology nodes those paths reach. Instances that already
/// carry a path keep it, so the operation is idempotent. Any unmapped tag
/// aborts with the complete list.
inline CorpusDataset expand_labels(const CorpusDataset& ds, const Ontology& o) {
  if (auto unmapped = unmapped_tags(ds, o); !unmapped.empty()) throw DataError(unmapped_message(unmapped));
  CorpusDataset out = ds;
  for (ImageRecord& im : out.images) {
    for (InstanceRecord& r : im.instances) {
      if (!r.labels) r.labels = o.path(*o.target(ds.corpus_id, r.source_tag));
    }
  }
  out.categories = detail::ontology_registry(out.images, o);
  return out;
}

/// Fills CategoryDef::descriptive_phrase from the ontology phrase table.
inline void attach_phrases(CorpusDataset& ds, const Ontology& o) {
  for (CategoryDef& c : ds.categories) {
    if (auto it = o.phrases().find(c.name); it != o.phrases().end()) c.descriptive_phrase = it->second;
  }
}

/// Shipped configuration: the unified tree for e-NDP, CATMuS and HORAE.
inline std::string_view default_ontology_json() {
  static constexpr std::string_view text = R"json({
  "nodes": [
    {"name": "Text"},
    {"name": "Text_Main", "parent": "Text"},
    {"name": "Paratext", "parent": "Text"},
    {"name": "Paratext_Marginal", "parent": "Paratext"},
    {"name": "Paratext_Header", "parent": "Paratext"},
    {"name": "Paratext_List", "parent": "Paratext"},
    {"name": "Paratext_DateLine", "parent": "Paratext"},
    {"name": "Decoration"},
    {"name": "Deco_Border", "parent": "Decoration"},
    {"name": "Deco_Miniature", "parent": "Decoration"},
    {"name": "Deco_Graphic", "parent": "Decoration"},
    {"name": "Deco_LineFiller", "parent": "Decoration"},
    {"name": "Initial"},
    {"name": "Initial_Manuscript", "parent": "Initial"},
    {"name": "Initial_Ms_Simple", "parent": "Initial_Manuscript"},
    {"name": "Initial_Ms_Decorated", "parent": "Initial_Manuscript"},
    {"name": "Initial_Ms_Historiated", "parent": "Initial_Manuscript"},
    {"name": "Initial_Printed", "parent": "Initial"},
    {"name": "Initial_P_DropCapital", "parent": "Initial_Printed"},
    {"name": "Numbering"},
    {"name": "Numbering_Page", "parent": "Numbering"},
    {"name": "Marks"},
    {"name": "Marks_Quire", "parent": "Marks"},
    {"name": "Marks_Stamp", "parent": "Marks"},
    {"name": "Marks_Seal", "parent": "Marks"},
    {"name": "Damage"},
    {"name": "Damage_Generic", "parent": "Damage"},
    {"name": "Damage_Scan", "parent": "Damage"}
  ],
  "mappings": [
    {"corpus": "endp", "tag": "Primary Text Region", "target": "Text_Main"},
    {"corpus": "endp", "tag": "Marginal Index Notes", "target": "Paratext_Marginal"},
    {"corpus": "endp", "tag": "Columnar Name List", "target": "Paratext_List"},
    {"corpus": "endp", "tag": "Date Line", "target": "Paratext_DateLine"},
    {"corpus": "endp", "tag": "Page Number", "target": "Numbering_Page"},
    {"corpus": "catmus", "tag": "MainZone", "target": "Text_Main"},
    {"corpus": "catmus", "tag": "MarginTextZone", "target": "Paratext_Marginal"},
    {"corpus": "catmus", "tag": "RunningTitleZone", "target": "Paratext_Header"},
    {"corpus": "catmus", "tag": "TitlePageZone", "target": "Paratext_Header"},
    {"corpus": "catmus", "tag": "GraphicZone", "target": "Deco_Graphic"},
    {"corpus": "catmus", "tag": "DropCapitalZone", "target": "Initial_P_DropCapital"},
    {"corpus": "catmus", "tag": "NumberingZone", "target": "Numbering_Page"},
    {"corpus": "catmus", "tag": "QuireMarksZone", "target": "Marks_Quire"},
    {"corpus": "catmus", "tag": "StampZone", "target": "Marks_Stamp"},
    {"corpus": "catmus", "tag": "SealZone", "target": "Marks_Seal"},
    {"corpus": "catmus", "tag": "DamageZone", "target": "Damage_Generic"},
    {"corpus": "catmus", "tag": "DigitizationArtefactZone", "target": "Damage_Scan"},
    {"corpus": "horae", "tag": "Border Text", "target": "Paratext_Marginal"},
    {"corpus": "horae", "tag": "Decorated Border", "target": "Deco_Border"},
    {"corpus": "horae", "tag": "Illustrated Border", "target": "Deco_Border"},
    {"corpus": "horae", "tag": "Miniature", "target": "Deco_Miniature"},
    {"corpus": "horae", "tag": "Line Filler", "target": "Deco_LineFiller"},
    {"corpus": "horae", "tag": "Simple Initial", "target": "Initial_Ms_Simple"},
    {"corpus": "horae", "tag": "Decorated Initial", "target": "Initial_Ms_Decorated"},
    {"corpus": "horae", "tag": "Historiated Initial", "target": "Initial_Ms_Historiated"}
  ],
  "phrases": {
    "MainZone": "main text zone",
    "MarginTextZone": "marginal text zone",
    "RunningTitleZone": "running title zone",
    "TitlePageZone": "title page zone",
    "GraphicZone": "graphic illustration zone",
    "DropCapitalZone": "ornate drop capital letter zone",
    "NumberingZone": "page or folio numbering zone",
    "QuireMarksZone": "quire mark zone",
    "StampZone": "library stamp zone",
    "SealZone": "seal zone",
    "DamageZone": "damaged area zone",
    "DigitizationArtefactZone": "digitization artefact zone"
  }
}
)json";
  return text;
}

inline const Ontology& default_ontology() {
  static const Ontology o = load_ontology(default_ontology_json());
  return o;
}

}  // namespace folio
