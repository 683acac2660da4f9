#pragma once

// Writers for COCO-AABB JSON, YOLO-AABB and YOLO-OBB label trees and the
// dataset manifest, plus readers for the YOLO line formats.
//
// Writers return file contents in memory (FileSet); commit() puts them on
// disk. Output is byte-deterministic for a given dataset and spec.

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "folio/corpus.hpp"
#include "folio/pipeline.hpp"

namespace folio {

enum class ExportFormat { coco_aabb, yolo_aabb, yolo_obb };

inline std::string_view to_string(ExportFormat f) {
  switch (f) {
    case ExportFormat::coco_aabb: return "coco-aabb";
    case ExportFormat::yolo_aabb: return "yolo-aabb";
    case ExportFormat::yolo_obb: return "yolo-obb";
  }
  return "?";
}

inline ExportFormat parse_export_format(std::string_view s) {
  if (s == "coco-aabb" || s == "coco_aabb") return ExportFormat::coco_aabb;
  if (s == "yolo-aabb" || s == "yolo_aabb") return ExportFormat::yolo_aabb;
  if (s == "yolo-obb" || s == "yolo_obb") return ExportFormat::yolo_obb;
  throw DataError("unknown export format '" + std::string(s) + "'");
}

struct ExportSpec {
  ExportFormat format = ExportFormat::coco_aabb;
  LabelLevel label_level = LabelLevel::leaf();
  std::filesystem::path output_root;
  int coordinate_precision = 6;

  void validate() const {
    if (coordinate_precision < 4 || coordinate_precision > 17) {
      throw DataError("coordinate precision must lie in [4, 17]");
    }
  }
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative path -> contents, in write order.
struct FileSet {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string path, std::string contents) { files.emplace_back(std::move(path), std::move(contents)); }
  void append(const FileSet& other, const std::string& prefix = "") {
    for (const auto& [p, c] : other.files) add(prefix + p, c);
  }
  const std::string* find(std::string_view path) const {
    for (const auto& [p, c] : files) {
      if (p == path) return &c;
    }
    return nullptr;
  }
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes every file under `root`. On failure, files written by this call
/// are removed again before the error propagates.
inline void commit(const FileSet& set, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  try {
    for (const auto& [rel, contents] : set.files) {
      const fs::path target = root / rel;
      fs::create_directories(target.parent_path());
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + target.string());
      written.push_back(target);
      out << contents;
      if (!out.flush()) throw IoError("cannot write " + target.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const fs::path& p : written) fs::remove(p, ec);
    throw;
  }
}

namespace detail {

inline std::string fixed(double v, int precision) {
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline double unit_clamp(double v) { return std::clamp(v, 0.0, 1.0); }

inline std::string label_file_stem(const ImageRecord& im) {
  std::string stem = im.image_id;
  for (char& c : stem) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return stem;
}

inline std::string label_file_path(const ImageRecord& im) {
  return "labels/" + std::string(to_string(im.split)) + "/" + label_file_stem(im) + ".txt";
}

inline std::map<std::string, int> category_index(const std::vector<std::string>& names) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < names.size(); ++i) idx.emplace(names[i], static_cast<int>(i));
  return idx;
}

inline std::string names_file(const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) out += n + "\n";
  return out;
}

inline void require_dims(const ImageRecord& im) {
  if (!(im.width > 0.0 && im.height > 0.0)) {
    throw DataError("image " + im.image_id + " has zero dimension");
  }
}

// Registry rows visible at the export level, re-indexed from 0.
inline std::vector<const CategoryDef*> export_categories(const CorpusDataset& ds, LabelLevel level) {
  std::vector<const CategoryDef*> out;
  for (const std::string& name : level_categories(ds, level)) out.push_back(ds.find_category(name));
  return out;
}

}  // namespace detail

/// COCO JSON with bbox = AABB, segmentation = source ring, area = polygon
/// area, annotation ids from 1. At leaf level the whole registry is written
/// (intermediate ontology nodes included, so label paths stay resolvable);
/// at a numbered level only that level's categories, re-indexed from 0.
inline std::string write_coco_aabb(const CorpusDataset& ds, const ExportSpec& spec = {}) {
  using json = nlohmann::ordered_json;
  const LabelLevel level = spec.label_level;
  std::vector<const CategoryDef*> cats;
  if (level.is_leaf()) {
    for (const CategoryDef& c : ds.categories) cats.push_back(&c);
  } else {
    cats = detail::export_categories(ds, level);
  }
  std::map<std::string, int> cat_ids;

  json doc;
  doc["info"] = {{"corpus_id", to_string(ds.corpus_id)}, {"label_level", level.name()}};
  doc["images"] = json::array();
  doc["annotations"] = json::array();
  doc["categories"] = json::array();
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const CategoryDef& c = *cats[i];
    json j{{"id", static_cast<int>(i)}, {"name", c.name}};
    if (c.descriptive_phrase) j["phrase"] = *c.descriptive_phrase;
    if (c.level > 0) {
      j["level"] = c.level;
      if (c.parent) j["parent"] = *c.parent;
    }
    cat_ids.emplace(c.name, static_cast<int>(i));
    doc["categories"].push_back(std::move(j));
  }

  std::int64_t ann_id = 1;
  for (const ImageRecord& im : ds.images) {
    json img;
    const bool numeric = !im.image_id.empty() && im.image_id.size() < 18 &&
                         std::all_of(im.image_id.begin(), im.image_id.end(),
                                     [](char c) { return c >= '0' && c <= '9'; }) &&
                         (im.image_id == "0" || im.image_id[0] != '0');
    if (numeric) {
      img["id"] = std::stoll(im.image_id);
    } else {
      img["id"] = im.image_id;
    }
    img["file_name"] = im.file_name;
    img["width"] = im.width;
    img["height"] = im.height;
    img["split"] = to_string(im.split);
    doc["images"].push_back(std::move(img));

    for (const InstanceRecord& r : im.instances) {
      const std::string& name = r.category(level);
      auto it = cat_ids.find(name);
      if (it == cat_ids.end()) throw DataError("instance category '" + name + "' not in registry");
      json ring = json::array();
      for (const Point2& p : r.polygon) {
        ring.push_back(p.x);
        ring.push_back(p.y);
      }
      json a;
      a["id"] = ann_id++;
      a["image_id"] = doc["images"].back()["id"];
      a["category_id"] = it->second;
      a["bbox"] = {r.aabb.x, r.aabb.y, r.aabb.w, r.aabb.h};
      a["segmentation"] = json::array({ring});
      a["area"] = polygon_area(r.polygon);
      a["iscrowd"] = 0;
      a["obb"] = {r.obb.cx, r.obb.cy, r.obb.w, r.obb.h, r.obb.theta};
      if (r.source_tag != name) a["source_tag"] = r.source_tag;
      if (r.labels) a["labels"] = r.labels->labels;
      doc["annotations"].push_back(std::move(a));
    }
  }
  return doc.dump(1) + "\n";
}

namespace detail {

// Corners starting at the smallest (y, x), keeping CCW order.
inline std::array<Point2, 4> ordered_corners(const Obb& b) {
  auto c = obb_corners(b);
  std::size_t start = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (c[i].y < c[start].y || (c[i].y == c[start].y && c[i].x < c[start].x)) start = i;
  }
  std::rotate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(start), c.end());
  return c;
}

template <class LineFn>
FileSet write_yolo(const CorpusDataset& ds, const ExportSpec& spec, LineFn line) {
  spec.validate();
  const std::vector<std::string> names = level_categories(ds, spec.label_level);
  const auto index = category_index(names);
  FileSet out;
  for (const ImageRecord& im : ds.images) {
    require_dims(im);
    std::string body;
    for (const InstanceRecord& r : im.instances) {
      const std::string& name = r.category(spec.label_level);
      auto it = index.find(name);
      if (it == index.end()) throw DataError("instance category '" + name + "' not in registry");
      body += line(im, r, it->second);
      body += '\n';
    }
    out.add(label_file_path(im), std::move(body));
  }
  out.add("names.txt", names_file(names));
  return out;
}

}  // namespace detail

/// One "class x1 y1 x2 y2 x3 y3 x4 y4" line per instance; corners from the
/// OBB, normalized by image size and clamped to [0,1].
inline FileSet write_yolo_obb(const CorpusDataset& ds, const ExportSpec& spec = {}) {
  const int prec = spec.coordinate_precision;
  return detail::write_yolo(ds, spec, [prec](const ImageRecord& im, const InstanceRecord& r, int cls) {
    std::string line = std::to_string(cls);
    for (const Point2& p : detail::ordered_corners(r.obb)) {
      line += ' ' + detail::fixed(detail::unit_clamp(p.x / im.width), prec);
      line += ' ' + detail::fixed(detail::unit_clamp(p.y / im.height), prec);
    }
    return line;
  });
}

/// One "class cx cy w h" line per instance, normalized by image size.
inline FileSet write_yolo_aabb(const CorpusDataset& ds, const ExportSpec& spec = {}) {
  const int prec = spec.coordinate_precision;
  return detail::write_yolo(ds, spec, [prec](const ImageRecord& im, const InstanceRecord& r, int cls) {
    const Aabb& b = r.aabb;
    std::string line = std::to_string(cls);
    line += ' ' + detail::fixed(detail::unit_clamp((b.x + b.w / 2.0) / im.width), prec);
    line += ' ' + detail::fixed(detail::unit_clamp((b.y + b.h / 2.0) / im.height), prec);
    line += ' ' + detail::fixed(detail::unit_clamp(b.w / im.width), prec);
    line += ' ' + detail::fixed(detail::unit_clamp(b.h / im.height), prec);
    return line;
  });
}

struct YoloObbLine {
  int class_index = 0;
  std::array<Point2, 4> corners;  // pixels
};

struct YoloAabbLine {
  int class_index = 0;
  Aabb box;  // pixels
};

namespace detail {

inline std::vector<std::vector<double>> numeric_lines(std::string_view text, std::size_t fields) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof() || row.size() != fields) throw ParseError("malformed YOLO line '" + line + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Parses a YOLO-OBB label file back into pixel corners.
inline std::vector<YoloObbLine> read_yolo_obb(std::string_view text, double width, double height) {
  std::vector<YoloObbLine> out;
  for (const auto& row : detail::numeric_lines(text, 9)) {
    YoloObbLine l;
    l.class_index = static_cast<int>(row[0]);
    for (std::size_t k = 0; k < 4; ++k) l.corners[k] = {row[1 + 2 * k] * width, row[2 + 2 * k] * height};
    out.push_back(l);
  }
  return out;
}

inline std::vector<YoloAabbLine> read_yolo_aabb(std::string_view text, double width, double height) {
  std::vector<YoloAabbLine> out;
  for (const auto& row : detail::numeric_lines(text, 5)) {
    const double w = row[3] * width, h = row[4] * height;
    out.push_back({static_cast<int>(row[0]), Aabb{row[1] * width - w / 2.0, row[2] * height - h / 2.0, w, h}});
  }
  return out;
}

/// Dataset manifest: categories (with phrases and hierarchy levels), split
/// membership and per-split counts.
inline std::string write_manifest(const CorpusDataset& ds, const ExportSpec& spec = {}) {
  using json = nlohmann::ordered_json;
  const LabelLevel level = spec.label_level;
  json doc;
  doc["corpus_id"] = to_string(ds.corpus_id);
  doc["label_level"] = level.name();
  doc["categories"] = json::array();
  const auto cats = detail::export_categories(ds, level);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const CategoryDef& c = *cats[i];
    json j{{"id", static_cast<int>(i)}, {"name", c.name}};
    j["phrase"] = c.descriptive_phrase ? json(*c.descriptive_phrase) : json(nullptr);
    if (c.level > 0) {
      j["level"] = c.level;
      j["parent"] = c.parent ? json(*c.parent) : json(nullptr);
    }
    doc["categories"].push_back(std::move(j));
  }

  const auto summary = split_summary(ds);
  json splits = json::object();
  json counts = json::object();
  for (Split s : {Split::trainval, Split::test, Split::unassigned}) {
    json ids = json::array();
    for (const ImageRecord& im : ds.images) {
      if (im.split == s) ids.push_back(im.image_id);
    }
    splits[std::string(to_string(s))] = std::move(ids);
    json per_cat = json::object();
    for (const ClassCount& cc : class_counts(ds, {s}, level)) per_cat[cc.category] = cc.count;
    counts[std::string(to_string(s))] = {{"images", summary.at(s).images},
                                         {"instances", summary.at(s).instances},
                                         {"per_category", std::move(per_cat)}};
  }
  doc["splits"] = std::move(splits);
  doc["counts"] = std::move(counts);
  doc["total_images"] = ds.images.size();
  doc["total_instances"] = ds.instance_count();
  return doc.dump(2) + "\n";
}

/// Dispatches on spec.format. COCO output is a single "annotations.json".
inline FileSet export_dataset(const CorpusDataset& ds, const ExportSpec& spec) {
  spec.validate();
  switch (spec.format) {
    case ExportFormat::coco_aabb: {
      FileSet out;
      out.add("annotations.json", write_coco_aabb(ds, spec));
      return out;
    }
    case ExportFormat::yolo_aabb: return write_yolo_aabb(ds, spec);
    case ExportFormat::yolo_obb: return write_yolo_obb(ds, spec);
  }
  return {};
}

}  // namespace folio
