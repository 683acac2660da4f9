#pragma once

// PAGE XML reader. Regions (any element whose local name ends in "Region")
// become instances; TextLine elements and everything below them are ignored.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <charconv>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "folio/corpus.hpp"

namespace folio {

/// How raw region types become source tags.
struct PagePolicy {
  /// Raw type -> source tag. Types absent from the map pass through unchanged.
  std::map<std::string, std::string> rename;
  /// When set, only these tags are ingested (in this registry order);
  /// other regions are reported and skipped.
  std::optional<std::vector<std::string>> accepted_tags;
};

namespace detail {

namespace pt = boost::property_tree;

inline std::string_view local_name(std::string_view key) {
  const auto colon = key.rfind(':');
  return colon == std::string_view::npos ? key : key.substr(colon + 1);
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::optional<std::string> attribute(const pt::ptree& node, const char* name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto v = attrs->get_optional<std::string>(name)) return *v;
  }
  return std::nullopt;
}

inline const pt::ptree* find_element(const pt::ptree& node, std::string_view name) {
  for (const auto& [key, child] : node) {
    if (local_name(key) == name) return &child;
  }
  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    if (const pt::ptree* hit = find_element(child, name)) return hit;
  }
  return nullptr;
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ParseError("invalid number '" + std::string(s) + "'");
  }
  return v;
}

/// Parses "x1,y1 x2,y2 ..." into points.
inline Polygon parse_points(std::string_view text) {
  Polygon poly;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view pair = text.substr(i, j - i);
    const auto comma = pair.find(',');
    if (comma == std::string_view::npos) throw ParseError("malformed point '" + std::string(pair) + "'");
    poly.push_back({parse_number(pair.substr(0, comma)), parse_number(pair.substr(comma + 1))});
    i = j;
  }
  return poly;
}

inline std::optional<std::string> structure_type(std::string_view custom) {
  static const std::regex re(R"(structure\s*\{[^}]*?type\s*:\s*([^;}]+))");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(custom.begin(), custom.end(), m, re)) {
    std::string t = m[1].str();
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    if (!t.empty()) return t;
  }
  return std::nullopt;
}

inline std::optional<Polygon> region_outline(const pt::ptree& region) {
  for (const auto& [key, child] : region) {
    if (local_name(key) != "Coords") continue;
    if (auto pts = attribute(child, "points")) return parse_points(*pts);
    // PAGE 2010 style: <Coords><Point x=".." y=".."/>...</Coords>
    Polygon poly;
    for (const auto& [pk, pnode] : child) {
      if (local_name(pk) != "Point") continue;
      auto x = attribute(pnode, "x");
      auto y = attribute(pnode, "y");
      if (!x || !y) throw ParseError("Point without x/y");
      poly.push_back({parse_number(*x), parse_number(*y)});
    }
    return poly;
  }
  return std::nullopt;
}

struct PageWalker {
  const PagePolicy& policy;
  Diagnostics* diag;
  ImageRecord& image;
  std::size_t region_index = 0;

  void walk(const pt::ptree& node) {
    for (const auto& [key, child] : node) {
      const std::string_view name = local_name(key);
      if (name == "TextLine" || key == "<xmlattr>" || key == "<xmlcomment>") continue;
      if (ends_with(name, "Region")) {
        visit_region(std::string(name), child);
        walk(child);  // nested regions
      }
    }
  }

  void visit_region(const std::string& element, const pt::ptree& region) {
    const std::size_t index = region_index++;
    const std::string id = attribute(region, "id").value_or("#" + std::to_string(index));
    const std::string where = image.image_id + "/" + element + " " + id;

    std::optional<std::string> raw_type;
    if (auto custom = attribute(region, "custom")) raw_type = structure_type(*custom);
    if (!raw_type) raw_type = attribute(region, "type");
    if (!raw_type) {
      warn(diag, where + ": no region type, skipped");
      return;
    }
    std::string tag = *raw_type;
    if (auto it = policy.rename.find(tag); it != policy.rename.end()) tag = it->second;
    if (policy.accepted_tags &&
        std::find(policy.accepted_tags->begin(), policy.accepted_tags->end(), tag) ==
            policy.accepted_tags->end()) {
      warn(diag, where + ": unresolvable region type '" + tag + "', skipped");
      return;
    }

    std::optional<Polygon> outline;
    try {
      outline = region_outline(region);
    } catch (const ParseError& e) {
      warn(diag, where + ": " + e.what() + ", skipped");
      return;
    }
    if (!outline) {
      warn(diag, where + ": missing Coords, skipped");
      return;
    }
    try {
      image.instances.push_back(
          make_instance(std::move(*outline), std::move(tag), std::pair{image.width, image.height}));
    } catch (const GeometryError& e) {
      warn(diag, where + ": " + e.what() + ", skipped");
    }
  }
};

inline std::string file_stem(std::string_view file_name) {
  return std::filesystem::path(std::string(file_name)).stem().string();
}

}  // namespace detail

/// Reads one PAGE XML document into an image record. The image id is the
/// stem of Page/@imageFilename. Regions that cannot be resolved are
/// reported through `diag` and skipped; malformed XML throws ParseError.
inline ImageRecord parse_page_xml(std::string_view document, const PagePolicy& policy = {},
                                  Diagnostics* diag = nullptr) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(document)};
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }

  const pt::ptree* page = detail::find_element(tree, "Page");
  if (page == nullptr) throw ParseError("no Page element");

  ImageRecord image;
  const auto file = detail::attribute(*page, "imageFilename");
  const auto width = detail::attribute(*page, "imageWidth");
  const auto height = detail::attribute(*page, "imageHeight");
  if (!file || !width || !height) {
    throw ParseError("Page lacks imageFilename/imageWidth/imageHeight");
  }
  image.file_name = *file;
  image.image_id = detail::file_stem(*file);
  image.width = detail::parse_number(*width);
  image.height = detail::parse_number(*height);
  if (!(image.width > 0.0 && image.height > 0.0)) {
    throw ParseError("Page " + image.file_name + " has non-positive dimensions");
  }

  detail::PageWalker walker{policy, diag, image};
  walker.walk(*page);
  return image;
}

/// Assembles parsed pages into a dataset. Category order follows the
/// policy's accepted tags when given, otherwise first appearance.
inline CorpusDataset assemble_dataset(CorpusId corpus, std::vector<ImageRecord> images,
                                      const PagePolicy& policy = {}) {
  CorpusDataset ds;
  ds.corpus_id = corpus;
  std::vector<std::string> names;
  if (policy.accepted_tags) names = *policy.accepted_tags;
  for (const ImageRecord& im : images) {
    for (const InstanceRecord& r : im.instances) {
      if (std::find(names.begin(), names.end(), r.source_tag) == names.end()) {
        names.push_back(r.source_tag);
      }
    }
  }
  for (std::string& n : names) {
    CategoryDef c;
    c.name = std::move(n);
    ds.categories.push_back(std::move(c));
  }
  renumber_categories(ds.categories);

  std::set<std::string> seen;
  for (const ImageRecord& im : images) {
    if (!seen.insert(im.image_id).second) throw DataError("duplicate image id '" + im.image_id + "'");
  }
  ds.images = std::move(images);
  return ds;
}

}  // namespace folio
