#pragma once

// COCO JSON reader. Besides the standard fields it understands the
// extensions written by folio's own COCO writer: info.corpus_id,
// images[].split, categories[].{phrase,parent,level} and
// annotations[].{source_tag,labels}.

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "folio/corpus.hpp"

namespace folio {

namespace detail {

using json = nlohmann::json;

inline std::string json_id(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  throw ParseError(what + ": id must be an integer or string");
}

inline double json_number(const json& obj, const char* key, const std::string& what) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ParseError(what + ": missing numeric '" + key + "'");
  return it->get<double>();
}

inline const json& json_array(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw ParseError(std::string("COCO document lacks '") + key + "' array");
  }
  return *it;
}

}  // namespace detail

/// Reads a COCO annotation file. When an annotation carries segmentation
/// polygons the first ring is the outline; otherwise the bbox corners are.
/// Dangling image/category references throw DataError naming all offenders.
inline CorpusDataset parse_coco(std::string_view document, CorpusId corpus = CorpusId::merged,
                                Diagnostics* diag = nullptr) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("COCO document must be a JSON object");

  CorpusDataset ds;
  ds.corpus_id = corpus;
  if (auto info = doc.find("info"); info != doc.end() && info->is_object()) {
    if (auto cid = info->find("corpus_id"); cid != info->end() && cid->is_string()) {
      ds.corpus_id = parse_corpus_id(cid->get<std::string>());
    }
  }

  std::map<std::int64_t, std::size_t> cat_index;
  for (const json& c : detail::json_array(doc, "categories")) {
    if (!c.contains("id") || !c["id"].is_number_integer() || !c.contains("name")) {
      throw ParseError("category needs integer 'id' and 'name'");
    }
    CategoryDef def;
    def.external_id = c["id"].get<std::int64_t>();
    def.name = c["name"].get<std::string>();
    if (auto p = c.find("phrase"); p != c.end() && p->is_string()) def.descriptive_phrase = p->get<std::string>();
    if (auto p = c.find("parent"); p != c.end() && p->is_string()) def.parent = p->get<std::string>();
    if (auto l = c.find("level"); l != c.end() && l->is_number_integer()) def.level = l->get<int>();
    if (!cat_index.emplace(*def.external_id, ds.categories.size()).second) {
      throw DataError("duplicate category id " + std::to_string(*def.external_id));
    }
    ds.categories.push_back(std::move(def));
  }
  renumber_categories(ds.categories);

  std::map<std::string, std::size_t> image_index;
  for (const json& im : detail::json_array(doc, "images")) {
    if (!im.is_object() || !im.contains("id")) throw ParseError("image entry without 'id'");
    ImageRecord rec;
    rec.image_id = detail::json_id(im["id"], "image");
    const std::string what = "image " + rec.image_id;
    rec.file_name = im.value("file_name", rec.image_id);
    rec.width = detail::json_number(im, "width", what);
    rec.height = detail::json_number(im, "height", what);
    if (!(rec.width > 0.0 && rec.height > 0.0)) throw ParseError(what + ": non-positive dimensions");
    if (auto s = im.find("split"); s != im.end() && s->is_string()) rec.split = parse_split(s->get<std::string>());
    if (!image_index.emplace(rec.image_id, ds.images.size()).second) {
      throw DataError("duplicate image id '" + rec.image_id + "'");
    }
    ds.images.push_back(std::move(rec));
  }

  std::vector<std::string> dangling;
  bool crowd_warned = false;
  for (const json& a : detail::json_array(doc, "annotations")) {
    const std::string ann_id = a.contains("id") ? a["id"].dump() : "?";
    if (!a.contains("image_id") || !a.contains("category_id")) {
      throw ParseError("annotation " + ann_id + " lacks image_id/category_id");
    }
    const std::string image_id = detail::json_id(a["image_id"], "annotation " + ann_id);
    auto img_it = image_index.find(image_id);
    const json& cat_json = a["category_id"];
    auto cat_it = cat_json.is_number_integer() ? cat_index.find(cat_json.get<std::int64_t>()) : cat_index.end();
    if (img_it == image_index.end()) dangling.push_back("annotation " + ann_id + ": image_id " + image_id);
    if (cat_it == cat_index.end()) dangling.push_back("annotation " + ann_id + ": category_id " + cat_json.dump());
    if (img_it == image_index.end() || cat_it == cat_index.end()) continue;

    ImageRecord& image = ds.images[img_it->second];
    const CategoryDef& cat = ds.categories[cat_it->second];

    if (a.value("iscrowd", 0) != 0 && !crowd_warned) {
      warn(diag, "iscrowd annotations present; flag ignored");
      crowd_warned = true;
    }

    Polygon outline;
    if (auto seg = a.find("segmentation"); seg != a.end() && seg->is_array() && !seg->empty()) {
      const json& ring = (*seg)[0];
      if (ring.is_array() && ring.size() >= 6 && ring.size() % 2 == 0) {
        for (std::size_t i = 0; i < ring.size(); i += 2) {
          outline.push_back({ring[i].get<double>(), ring[i + 1].get<double>()});
        }
      } else {
        warn(diag, "annotation " + ann_id + ": unusable segmentation ring, using bbox");
      }
    } else if (seg != a.end() && seg->is_object()) {
      warn(diag, "annotation " + ann_id + ": RLE segmentation ignored, using bbox");
    }
    if (outline.empty()) {
      auto bb = a.find("bbox");
      if (bb == a.end() || !bb->is_array() || bb->size() != 4) {
        warn(diag, "annotation " + ann_id + ": no bbox or segmentation, skipped");
        continue;
      }
      const double x = (*bb)[0].get<double>(), y = (*bb)[1].get<double>();
      const double w = (*bb)[2].get<double>(), h = (*bb)[3].get<double>();
      outline = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
    }

    std::string tag = a.value("source_tag", cat.name);
    InstanceRecord rec;
    try {
      rec = make_instance(std::move(outline), std::move(tag), std::pair{image.width, image.height});
    } catch (const GeometryError& e) {
      warn(diag, "annotation " + ann_id + ": " + e.what() + ", skipped");
      continue;
    }
    if (auto labels = a.find("labels"); labels != a.end() && labels->is_array() && !labels->empty()) {
      rec.labels = LabelPath{labels->get<std::vector<std::string>>()};
    }
    image.instances.push_back(std::move(rec));
  }
  if (!dangling.empty()) {
    std::string msg = "dangling references:";
    for (const std::string& d : dangling) msg += "\n  " + d;
    throw DataError(msg);
  }
  return ds;
}

}  // namespace folio
