#pragma once

// Fixture builders shared by the unit suites and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "folio/corpus.hpp"
#include "folio/geometry.hpp"
#include "folio/pipeline.hpp"

#ifndef FOLIO_SOURCE_DIR
#define FOLIO_SOURCE_DIR "."
#endif

namespace fixtures {

using namespace folio;

inline std::filesystem::path source_path(const std::string& rel) { return std::filesystem::path(FOLIO_SOURCE_DIR) / rel; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("folio_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- random

inline Obb random_obb(std::mt19937_64& rng, double extent = 100.0) {
  std::uniform_real_distribution<double> pos(0.0, extent), side(1.0, extent / 2), ang(0.0, std::numbers::pi);
  return canonical_obb({pos(rng), pos(rng), side(rng), side(rng), ang(rng)});
}

/// A second box near `a` so that overlaps are frequent.
inline Obb nearby_obb(std::mt19937_64& rng, const Obb& a) {
  std::uniform_real_distribution<double> jitter(-0.5, 0.5), scale(0.5, 1.5), ang(0.0, std::numbers::pi);
  return canonical_obb({a.cx + jitter(rng) * a.w, a.cy + jitter(rng) * a.h, a.w * scale(rng), a.h * scale(rng), ang(rng)});
}

/// Simple (star-shaped) polygon with `n` vertices around a random centre.
inline Polygon random_star_polygon(std::mt19937_64& rng, int n, double extent = 100.0) {
  std::uniform_real_distribution<double> c(extent * 0.25, extent * 0.75), r(extent * 0.05, extent * 0.25),
      a(0.0, 2 * std::numbers::pi);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& v : angles) v = a(rng);
  std::sort(angles.begin(), angles.end());
  const double cx = c(rng), cy = c(rng);
  Polygon p;
  for (double t : angles) {
    const double rad = r(rng);
    p.push_back({cx + rad * std::cos(t), cy + rad * std::sin(t)});
  }
  return p;
}

/// Convex polygon: n points on an ellipse at random angles.
inline Polygon random_convex_polygon(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> a(0.0, 2 * std::numbers::pi), ax(5.0, 50.0);
  const double rx = ax(rng), ry = ax(rng);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& v : angles) v = a(rng);
  std::sort(angles.begin(), angles.end());
  Polygon p;
  for (double t : angles) p.push_back({60 + rx * std::cos(t), 60 + ry * std::sin(t)});
  return p;
}

inline Polygon rect(double x, double y, double w, double h) { return {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}}; }

inline Polygon rotated_rect(double cx, double cy, double w, double h, double theta) {
  const auto c = obb_corners(canonical_obb({cx, cy, w, h, theta}));
  return {c.begin(), c.end()};
}

// ---------------------------------------------------------------- PAGE XML

struct RegionSpec {
  std::string tag;
  Polygon polygon;
  bool via_custom = true;  // structure{type:...} on @custom, else @type
  std::string element = "TextRegion";
};

inline std::string points_attr(const Polygon& p) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", i ? " " : "", p[i].x, p[i].y);
    out += buf;
  }
  return out;
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&') o += "&amp;";
    else if (c == '<') o += "&lt;";
    else if (c == '"') o += "&quot;";
    else o += c;
  }
  return o;
}

/// Minimal PAGE 2019 document with the given regions.
inline std::string page_xml(const std::string& file_name, double width, double height,
                            const std::vector<RegionSpec>& regions) {
  char dims[128];
  std::snprintf(dims, sizeof dims, "imageWidth=\"%g\" imageHeight=\"%g\"", width, height);
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                  "<PcGts xmlns=\"http://schema.primaresearch.org/PAGE/gts/pagecontent/2019-07-15\">\n"
                  "  <Metadata><Creator>fixtures</Creator></Metadata>\n"
                  "  <Page imageFilename=\"" + xml_escape(file_name) + "\" " + dims + ">\n";
  int k = 0;
  for (const RegionSpec& r : regions) {
    s += "    <" + r.element + " id=\"r" + std::to_string(k++) + "\" ";
    s += r.via_custom ? "custom=\"structure {type:" + xml_escape(r.tag) + ";}\"" : "type=\"" + xml_escape(r.tag) + "\"";
    s += ">\n      <Coords points=\"" + points_attr(r.polygon) + "\"/>\n";
    s += "    </" + r.element + ">\n";
  }
  s += "  </Page>\n</PcGts>\n";
  return s;
}

// ---------------------------------------------------------------- synthetic corpora

constexpr double kPageW = 1200.0, kPageH = 1600.0;

/// Places the k-th box of a page on a 6 x 12 grid; the shape cycles through
/// a few aspect ratios and small rotations.
inline Polygon grid_region(std::size_t k, std::size_t salt) {
  const double cw = kPageW / 6.0, ch = kPageH / 12.0;
  const double cx = cw * (static_cast<double>(k % 6) + 0.5), cy = ch * (static_cast<double>((k / 6) % 12) + 0.5);
  static const double shapes[][2] = {{150, 100}, {180, 40}, {60, 60}, {100, 120}, {170, 20}, {40, 110}};
  const auto& s = shapes[(k + salt) % 6];
  const double theta = 0.05 * static_cast<double>((k * 7 + salt) % 5);
  return rotated_rect(cx, cy, s[0], s[1], theta);
}

struct CorpusPlan {
  CorpusId corpus;
  std::string prefix;  // image id prefix
  std::size_t n_images = 0;
  std::size_t n_test = 0;
  std::vector<std::pair<std::string, std::size_t>> test_counts;
  std::vector<std::pair<std::string, std::size_t>> trainval_counts;
};

inline std::string image_name(const CorpusPlan& p, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu", p.prefix.c_str(), i);
  return buf;
}

/// Distributes instance counts over the given pages round-robin.
inline std::map<std::string, std::vector<std::string>> distribute(
    const std::vector<std::string>& pages, const std::vector<std::pair<std::string, std::size_t>>& counts) {
  std::map<std::string, std::vector<std::string>> out;
  if (pages.empty()) return out;
  std::size_t cursor = 0;
  for (const auto& [tag, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) out[pages[cursor++ % pages.size()]].push_back(tag);
  }
  return out;
}

/// Page-level tag lists for a plan. Test pages come from `test_ids`.
inline std::map<std::string, std::vector<std::string>> plan_pages(const CorpusPlan& p,
                                                                  const std::vector<std::string>& test_ids) {
  std::vector<std::string> test(test_ids), trainval;
  std::set<std::string> t(test_ids.begin(), test_ids.end());
  for (std::size_t i = 0; i < p.n_images; ++i) {
    if (!t.contains(image_name(p, i))) trainval.push_back(image_name(p, i));
  }
  auto a = distribute(test, p.test_counts);
  auto b = distribute(trainval, p.trainval_counts);
  for (std::size_t i = 0; i < p.n_images; ++i) {
    const std::string id = image_name(p, i);
    auto& tags = a[id];
    tags.insert(tags.end(), b[id].begin(), b[id].end());
  }
  return a;
}

/// Test ids chosen deterministically (every k-th image) for manifest plans.
inline std::vector<std::string> manifest_test_ids(const CorpusPlan& p) {
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < p.n_test; ++j) ids.push_back(image_name(p, (j * p.n_images) / p.n_test));
  return ids;
}

/// PAGE XML documents (file name -> text) for a plan.
inline std::vector<std::pair<std::string, std::string>> plan_page_xml(const CorpusPlan& p,
                                                                      const std::vector<std::string>& test_ids) {
  std::vector<std::pair<std::string, std::string>> docs;
  const auto pages = plan_pages(p, test_ids);
  for (std::size_t i = 0; i < p.n_images; ++i) {
    const std::string id = image_name(p, i);
    std::vector<RegionSpec> regions;
    const auto& tags = pages.at(id);
    for (std::size_t k = 0; k < tags.size(); ++k) {
      regions.push_back({tags[k], grid_region(k, i), k % 2 == 0, k % 3 == 0 ? "GraphicRegion" : "TextRegion"});
    }
    docs.emplace_back(id + ".xml", page_xml(id + ".jpg", kPageW, kPageH, regions));
  }
  return docs;
}

/// COCO document for a plan (CATMuS ships COCO). Category ids start at 1.
inline std::string plan_coco(const CorpusPlan& p, const std::vector<std::string>& test_ids) {
  const auto pages = plan_pages(p, test_ids);
  std::vector<std::string> cats;
  for (const auto* list : {&p.test_counts, &p.trainval_counts}) {
    for (const auto& [tag, _] : *list) {
      if (std::find(cats.begin(), cats.end(), tag) == cats.end()) cats.push_back(tag);
    }
  }
  std::string s = "{\"images\": [";
  for (std::size_t i = 0; i < p.n_images; ++i) {
    s += (i ? ",\n" : "\n") + std::string("{\"id\": \"") + image_name(p, i) + "\", \"file_name\": \"" + image_name(p, i) +
         ".jpg\", \"width\": 1200, \"height\": 1600}";
  }
  s += "],\n\"categories\": [";
  for (std::size_t c = 0; c < cats.size(); ++c) {
    s += (c ? ", " : "") + std::string("{\"id\": ") + std::to_string(c + 1) + ", \"name\": \"" + cats[c] + "\"}";
  }
  s += "],\n\"annotations\": [";
  std::size_t ann = 0;
  for (std::size_t i = 0; i < p.n_images; ++i) {
    const auto& tags = pages.at(image_name(p, i));
    for (std::size_t k = 0; k < tags.size(); ++k) {
      const Polygon poly = grid_region(k, i);
      const Aabb b = aabb_of(poly);
      const auto cat = std::find(cats.begin(), cats.end(), tags[k]) - cats.begin() + 1;
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "%s{\"id\": %zu, \"image_id\": \"%s\", \"category_id\": %td, \"bbox\": [%.17g, %.17g, %.17g, %.17g], "
                    "\"area\": %.17g, \"iscrowd\": 0, \"segmentation\": [[",
                    ann ? ",\n" : "\n", ann + 1, image_name(p, i).c_str(), cat, b.x, b.y, b.w, b.h, polygon_area(poly));
      s += buf;
      for (std::size_t v = 0; v < poly.size(); ++v) {
        std::snprintf(buf, sizeof buf, "%s%.17g, %.17g", v ? ", " : "", poly[v].x, poly[v].y);
        s += buf;
      }
      s += "]]}";
      ++ann;
    }
  }
  s += "]}\n";
  return s;
}

/// e-NDP-shaped plan: 364 pages, seeded 90/10 split, 275 test instances.
inline CorpusPlan endp_plan() {
  return {CorpusId::endp, "endp", 364, 37,
          {{"Primary Text Region", 91}, {"Page Number", 57}, {"Date Line", 54}, {"Columnar Name List", 48},
           {"Marginal Index Notes", 25}},
          {{"Primary Text Region", 800}, {"Page Number", 500}, {"Date Line", 480}, {"Columnar Name List", 430},
           {"Marginal Index Notes", 210}}};
}

/// CATMuS-shaped plan: 1683 pages, manifest split, 733 test instances over
/// nine zones plus a line-level class and a zone absent from test.
inline CorpusPlan catmus_plan() {
  return {CorpusId::catmus, "catmus", 1683, 158,
          {{"MainZone", 275}, {"MarginTextZone", 199}, {"DropCapitalZone", 124}, {"NumberingZone", 94},
           {"RunningTitleZone", 18}, {"GraphicZone", 10}, {"QuireMarksZone", 8}, {"StampZone", 4},
           {"TitlePageZone", 1}, {"DefaultLine", 40}},
          {{"MainZone", 2500}, {"MarginTextZone", 1700}, {"DropCapitalZone", 1100}, {"NumberingZone", 850},
           {"RunningTitleZone", 160}, {"GraphicZone", 90}, {"QuireMarksZone", 70}, {"StampZone", 35},
           {"TitlePageZone", 9}, {"DefaultLine", 300}, {"DamageZone", 12}}};
}

/// HORAE-shaped plan: 463 pages, manifest split, 558 test instances.
inline CorpusPlan horae_plan() {
  return {CorpusId::horae, "horae", 463, 45,
          {{"Decorated Initial", 282}, {"Line Filler", 112}, {"Decorated Border", 77}, {"Simple Initial", 57},
           {"Miniature", 15}, {"Illustrated Border", 10}, {"Border Text", 4}, {"Historiated Initial", 1}},
          {{"Decorated Initial", 2500}, {"Line Filler", 1000}, {"Decorated Border", 700}, {"Simple Initial", 500},
           {"Miniature", 130}, {"Illustrated Border", 90}, {"Border Text", 40}, {"Historiated Initial", 9}}};
}

/// Test ids produced by the seeded split for a plan's image ids.
inline std::vector<std::string> seeded_test_ids(const CorpusPlan& p, std::uint64_t seed, double fraction = 0.9) {
  CorpusDataset skeleton;
  for (std::size_t i = 0; i < p.n_images; ++i) {
    ImageRecord im;
    im.image_id = image_name(p, i);
    im.width = kPageW;
    im.height = kPageH;
    skeleton.images.push_back(im);
  }
  SplitSpec spec;
  spec.seed = seed;
  spec.trainval_fraction = fraction;
  const CorpusDataset split = split_dataset(skeleton, spec);
  std::vector<std::string> ids;
  for (const ImageRecord& im : split.images) {
    if (im.split == Split::test) ids.push_back(im.image_id);
  }
  return ids;
}

// ---------------------------------------------------------------- small datasets

/// Dataset from (image, tag, polygon) triples; pages are 1200 x 1600.
inline CorpusDataset small_dataset(CorpusId corpus,
                                   const std::vector<std::tuple<std::string, std::string, Polygon>>& items,
                                   Split split = Split::test) {
  std::vector<ImageRecord> images;
  for (const auto& [img, tag, poly] : items) {
    auto it = std::find_if(images.begin(), images.end(), [&](const ImageRecord& r) { return r.image_id == img; });
    if (it == images.end()) {
      ImageRecord r;
      r.image_id = img;
      r.file_name = img + ".jpg";
      r.width = kPageW;
      r.height = kPageH;
      r.split = split;
      images.push_back(r);
      it = images.end() - 1;
    }
    it->instances.push_back(make_instance(poly, tag, std::pair{kPageW, kPageH}));
  }
  CorpusDataset ds;
  ds.corpus_id = corpus;
  for (const ImageRecord& im : images) {
    for (const InstanceRecord& r : im.instances) {
      if (!ds.find_category(r.source_tag)) {
        CategoryDef c;
        c.name = r.source_tag;
        ds.categories.push_back(c);
      }
    }
  }
  renumber_categories(ds.categories);
  ds.images = std::move(images);
  return ds;
}

/// One page per corpus, each covering a handful of the corpus's tags.
inline CorpusDataset endp_mini() {
  return small_dataset(CorpusId::endp, {{"p1", "Primary Text Region", rect(100, 200, 800, 900)},
                                        {"p1", "Page Number", rect(1000, 50, 60, 40)},
                                        {"p1", "Date Line", rotated_rect(500, 150, 400, 40, 0.03)},
                                        {"p1", "Marginal Index Notes", rect(20, 300, 60, 500)}});
}

inline CorpusDataset catmus_mini() {
  return small_dataset(CorpusId::catmus, {{"c1", "MainZone", rect(150, 200, 700, 1000)},
                                          {"c1", "DropCapitalZone", rect(150, 200, 90, 90)},
                                          {"c1", "QuireMarksZone", rect(900, 1450, 80, 30)},
                                          {"c1", "NumberingZone", rect(1050, 60, 50, 30)}});
}

inline CorpusDataset horae_mini() {
  return small_dataset(CorpusId::horae, {{"h1", "Decorated Initial", rect(200, 300, 120, 120)},
                                         {"h1", "Simple Initial", rect(200, 700, 40, 40)},
                                         {"h1", "Line Filler", rect(500, 760, 200, 20)},
                                         {"h1", "Miniature", rect(300, 900, 500, 400)},
                                         {"h1", "Border Text", rotated_rect(1100, 800, 600, 50, 1.5)}});
}

}  // namespace fixtures
