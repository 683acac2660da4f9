#pragma once

// Canonical annotation model shared by every stage of the toolkit.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "folio/geometry.hpp"

namespace folio {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for inconsistent datasets or arguments (unknown split, unmapped
/// tags, dangling references, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collects non-fatal problems met while reading or transforming data.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

enum class CorpusId { endp, catmus, horae, merged };

inline std::string_view to_string(CorpusId id) {
  switch (id) {
    case CorpusId::endp: return "endp";
    case CorpusId::catmus: return "catmus";
    case CorpusId::horae: return "horae";
    case CorpusId::merged: return "merged";
  }
  return "?";
}

inline CorpusId parse_corpus_id(std::string_view s) {
  if (s == "endp" || s == "e-ndp") return CorpusId::endp;
  if (s == "catmus") return CorpusId::catmus;
  if (s == "horae") return CorpusId::horae;
  if (s == "merged") return CorpusId::merged;
  throw DataError("unknown corpus id '" + std::string(s) + "'");
}

enum class Split { unassigned, trainval, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::unassigned: return "unassigned";
    case Split::trainval: return "trainval";
    case Split::test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "trainval") return Split::trainval;
  if (s == "test") return Split::test;
  if (s == "unassigned") return Split::unassigned;
  throw DataError("unknown split '" + std::string(s) + "'");
}

/// Split selector used by reporting operations; `all` spans every image.
struct SplitFilter {
  std::optional<Split> split;  // nullopt = all images

  static SplitFilter parse(std::string_view s) {
    if (s == "all") return {};
    return {parse_split(s)};
  }
  bool accepts(Split s) const { return !split || *split == s; }
};

/// Hierarchy depth selector: the mapped (leaf) node or an explicit level >= 1.
struct LabelLevel {
  int level = 0;  // 0 = leaf

  static LabelLevel leaf() { return {}; }
  static LabelLevel at(int level) {
    if (level < 1) throw DataError("hierarchy level must be >= 1");
    return {level};
  }
  static LabelLevel parse(std::string_view s) {
    if (s == "leaf") return leaf();
    int v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw DataError("invalid level '" + std::string(s) + "'");
      v = v * 10 + (c - '0');
    }
    if (s.empty()) throw DataError("invalid level ''");
    return at(v);
  }
  bool is_leaf() const { return level == 0; }
  std::string name() const { return is_leaf() ? "leaf" : std::to_string(level); }

  friend bool operator==(const LabelLevel&, const LabelLevel&) = default;
};

struct CategoryDef {
  int id = 0;
  std::string name;
  std::optional<std::string> descriptive_phrase;
  // Set on label-expanded datasets: position of the node in the ontology.
  std::optional<std::string> parent;
  int level = 0;  // 0 = not an ontology node
  // Identifier used by the source file (COCO ids need not start at 0).
  std::optional<std::int64_t> external_id;
};

struct LabelPath {
  std::vector<std::string> labels;

  const std::string& leaf() const { return labels.back(); }
  std::size_t depth() const { return labels.size(); }
  /// Ancestor at `level`, or the deepest label when the path is shorter.
  const std::string& at(LabelLevel level) const {
    if (level.is_leaf() || static_cast<std::size_t>(level.level) >= labels.size()) {
      return labels.back();
    }
    return labels[static_cast<std::size_t>(level.level) - 1];
  }

  friend bool operator==(const LabelPath&, const LabelPath&) = default;
};

struct InstanceRecord {
  Polygon polygon;
  std::string source_tag;
  Aabb aabb;
  Obb obb;
  std::optional<LabelPath> labels;

  /// Category name used at the given hierarchy level.
  const std::string& category(LabelLevel level = LabelLevel::leaf()) const {
    return labels ? labels->at(level) : source_tag;
  }
};

struct ImageRecord {
  std::string image_id;
  std::string file_name;
  double width = 0.0;
  double height = 0.0;
  std::vector<InstanceRecord> instances;
  Split split = Split::unassigned;
};

struct CorpusDataset {
  CorpusId corpus_id = CorpusId::merged;
  std::vector<CategoryDef> categories;
  std::vector<ImageRecord> images;

  const CategoryDef* find_category(std::string_view name) const {
    for (const CategoryDef& c : categories) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  bool is_label_expanded() const {
    return std::all_of(images.begin(), images.end(), [](const ImageRecord& im) {
      return std::all_of(im.instances.begin(), im.instances.end(),
                         [](const InstanceRecord& r) { return r.labels.has_value(); });
    });
  }
  std::size_t instance_count() const {
    std::size_t n = 0;
    for (const ImageRecord& im : images) n += im.instances.size();
    return n;
  }
};

/// Clamps every vertex into [0,width]x[0,height].
inline Polygon clamp_polygon(const Polygon& poly, double width, double height) {
  Polygon out;
  out.reserve(poly.size());
  for (const Point2& p : poly) {
    out.push_back({std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)});
  }
  return out;
}

/// Builds an instance with derived boxes. When image dimensions are given,
/// the polygon is clamped to the page first. Throws GeometryError for
/// degenerate outlines.
inline InstanceRecord make_instance(Polygon polygon, std::string source_tag,
                                    std::optional<std::pair<double, double>> page = {}) {
  if (page) polygon = clamp_polygon(polygon, page->first, page->second);
  polygon = dedupe_consecutive(polygon);
  validate_polygon(polygon);
  InstanceRecord r;
  r.aabb = aabb_of(polygon);
  r.obb = min_area_obb(polygon);
  r.polygon = std::move(polygon);
  r.source_tag = std::move(source_tag);
  return r;
}

/// Re-numbers category ids 0..n-1 in table order.
inline void renumber_categories(std::vector<CategoryDef>& cats) {
  for (std::size_t i = 0; i < cats.size(); ++i) cats[i].id = static_cast<int>(i);
}

/// Category names visible at `level`, in registry order.
///
/// For datasets without label paths this is the registry itself. For
/// label-expanded datasets it is every registry node of exactly that level,
/// every shallower node with no registered child, and every node some
/// instance projects to (leaf: nodes without registered children plus
/// instance leaves).
inline std::vector<std::string> level_categories(const CorpusDataset& ds, LabelLevel level) {
  std::vector<std::string> out;
  const bool expanded = std::any_of(ds.categories.begin(), ds.categories.end(),
                                    [](const CategoryDef& c) { return c.level > 0; });
  if (!expanded) {
    for (const CategoryDef& c : ds.categories) out.push_back(c.name);
    return out;
  }
  std::set<std::string> has_child;
  for (const CategoryDef& c : ds.categories) {
    if (c.parent) has_child.insert(*c.parent);
  }
  std::set<std::string> projected;
  for (const ImageRecord& im : ds.images) {
    for (const InstanceRecord& r : im.instances) projected.insert(r.category(level));
  }
  for (const CategoryDef& c : ds.categories) {
    const bool childless = !has_child.contains(c.name);
    bool keep = projected.contains(c.name);
    if (level.is_leaf()) {
      keep = keep || childless;
    } else {
      keep = keep || c.level == level.level || (c.level < level.level && childless);
    }
    if (keep) out.push_back(c.name);
  }
  return out;
}

struct ValidationIssue {
  enum class Kind { degenerate_polygon, out_of_bounds, empty_category, duplicate_id, unknown_category };
  Kind kind;
  std::string where;
  std::string detail;
};

inline std::string_view to_string(ValidationIssue::Kind k) {
  using K = ValidationIssue::Kind;
  switch (k) {
    case K::degenerate_polygon: return "degenerate polygon";
    case K::out_of_bounds: return "out-of-bounds coordinates";
    case K::empty_category: return "empty category";
    case K::duplicate_id: return "duplicate id";
    case K::unknown_category: return "unknown category";
  }
  return "?";
}

/// Report-only consistency check; never modifies the dataset.
inline std::vector<ValidationIssue> validate_dataset(const CorpusDataset& ds) {
  using K = ValidationIssue::Kind;
  std::vector<ValidationIssue> issues;

  std::set<int> cat_ids;
  std::set<std::string> cat_names;
  for (const CategoryDef& c : ds.categories) {
    if (!cat_ids.insert(c.id).second) {
      issues.push_back({K::duplicate_id, "category " + c.name, "category id " + std::to_string(c.id)});
    }
    if (!cat_names.insert(c.name).second) {
      issues.push_back({K::duplicate_id, "category " + c.name, "category name"});
    }
  }

  std::set<std::string> image_ids;
  std::map<std::string, std::size_t> usage;
  for (const ImageRecord& im : ds.images) {
    if (!image_ids.insert(im.image_id).second) {
      issues.push_back({K::duplicate_id, "image " + im.image_id, "image id"});
    }
    for (std::size_t i = 0; i < im.instances.size(); ++i) {
      const InstanceRecord& r = im.instances[i];
      const std::string where = "image " + im.image_id + " instance " + std::to_string(i);
      try {
        validate_polygon(r.polygon);
      } catch (const GeometryError& e) {
        issues.push_back({K::degenerate_polygon, where, e.what()});
      }
      for (const Point2& p : r.polygon) {
        if (p.x < 0.0 || p.y < 0.0 || p.x > im.width || p.y > im.height) {
          issues.push_back({K::out_of_bounds, where,
                            "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"});
          break;
        }
      }
      if (r.labels) {
        for (const std::string& l : r.labels->labels) {
          if (!cat_names.contains(l)) issues.push_back({K::unknown_category, where, l});
          ++usage[l];
        }
      } else {
        if (!cat_names.contains(r.source_tag)) {
          issues.push_back({K::unknown_category, where, r.source_tag});
        }
        ++usage[r.source_tag];
      }
    }
  }
  for (const CategoryDef& c : ds.categories) {
    if (usage[c.name] == 0) issues.push_back({K::empty_category, "category " + c.name, "no instances"});
  }
  return issues;
}

}  // namespace folio
