#pragma once

// COCO-protocol detection evaluation for axis-aligned and oriented boxes:
// greedy score-ordered matching, 101-point interpolated AP over IoU
// thresholds .50:.05:.95, best-F1 operating point, average recall
// (maxDets = 100), and hierarchical roll-up through an ontology.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "folio/coco.hpp"
#include "folio/corpus.hpp"
#include "folio/geometry.hpp"
#include "folio/ontology.hpp"

namespace folio {

enum class GeometryKind { aabb, obb };

inline std::string_view to_string(GeometryKind k) { return k == GeometryKind::aabb ? "aabb" : "obb"; }

inline GeometryKind parse_geometry_kind(std::string_view s) {
  if (s == "aabb") return GeometryKind::aabb;
  if (s == "obb") return GeometryKind::obb;
  throw DataError("unknown geometry kind '" + std::string(s) + "'");
}

using Geometry = std::variant<Aabb, Obb>;

inline GeometryKind kind_of(const Geometry& g) {
  return std::holds_alternative<Aabb>(g) ? GeometryKind::aabb : GeometryKind::obb;
}

inline double iou(const Geometry& a, const Geometry& b) {
  if (kind_of(a) != kind_of(b)) throw DataError("IoU between different geometry kinds");
  if (const Aabb* x = std::get_if<Aabb>(&a)) return iou_aabb(*x, std::get<Aabb>(b));
  return iou_obb(std::get<Obb>(a), std::get<Obb>(b));
}

struct Detection {
  std::string image_id;
  int category_id = 0;  // index into the dataset's category table
  Geometry geometry;
  double score = 0.0;
};

struct DetectionSet {
  std::optional<GeometryKind> kind;  // unset when there are no detections
  std::vector<Detection> items;
};

/// Reads a COCO results array. Each entry has image_id, category_id, score
/// and either "bbox": [x, y, w, h] or "obb": [cx, cy, w, h, theta]. Category
/// ids are resolved against the dataset's file ids; unknown images or
/// categories and mixed geometry kinds are errors.
inline DetectionSet load_detections(std::string_view document, const CorpusDataset& ds) {
  using json = nlohmann::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed detections JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("detections must be a JSON array");

  std::map<std::int64_t, int> cat_by_file_id;
  for (const CategoryDef& c : ds.categories) cat_by_file_id.emplace(c.external_id.value_or(c.id), c.id);
  std::set<std::string> image_ids;
  for (const ImageRecord& im : ds.images) image_ids.insert(im.image_id);

  DetectionSet out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& d = doc[i];
    const std::string where = "detection " + std::to_string(i);
    if (!d.is_object() || !d.contains("image_id") || !d.contains("category_id") || !d.contains("score")) {
      throw ParseError(where + ": needs image_id, category_id and score");
    }
    Detection det;
    det.image_id = detail::json_id(d["image_id"], where);
    if (!image_ids.contains(det.image_id)) throw DataError(where + ": unknown image_id " + det.image_id);
    if (!d["category_id"].is_number_integer()) throw ParseError(where + ": category_id must be an integer");
    auto cat = cat_by_file_id.find(d["category_id"].get<std::int64_t>());
    if (cat == cat_by_file_id.end()) throw DataError(where + ": unknown category_id " + d["category_id"].dump());
    det.category_id = cat->second;
    if (!d["score"].is_number()) throw ParseError(where + ": score must be a number");
    det.score = d["score"].get<double>();
    if (!std::isfinite(det.score) || det.score < 0.0 || det.score > 1.0) {
      throw DataError(where + ": score outside [0, 1]");
    }

    const bool has_bbox = d.contains("bbox"), has_obb = d.contains("obb");
    if (has_bbox == has_obb) throw ParseError(where + ": exactly one of bbox / obb required");
    const json& g = has_bbox ? d["bbox"] : d["obb"];
    const std::size_t arity = has_bbox ? 4 : 5;
    if (!g.is_array() || g.size() != arity) throw ParseError(where + ": malformed geometry");
    std::vector<double> v;
    for (const json& x : g) {
      if (!x.is_number()) throw ParseError(where + ": malformed geometry");
      v.push_back(x.get<double>());
    }
    try {
      if (has_bbox) {
        if (!(v[2] > 0.0 && v[3] > 0.0)) throw GeometryError("bbox sides must be positive");
        det.geometry = Aabb{v[0], v[1], v[2], v[3]};
      } else {
        det.geometry = canonical_obb(Obb{v[0], v[1], v[2], v[3], v[4]});
      }
    } catch (const GeometryError& e) {
      throw DataError(where + ": " + e.what());
    }
    const GeometryKind k = kind_of(det.geometry);
    if (out.kind && *out.kind != k) throw DataError("detections mix bbox and obb geometries");
    out.kind = k;
    out.items.push_back(std::move(det));
  }
  return out;
}

/// Result of matching one image/category: per input detection the matched
/// ground-truth index (or -1), and per ground truth the matching detection.
struct MatchResult {
  std::vector<int> det_to_gt;
  std::vector<int> gt_to_det;

  bool is_tp(std::size_t det) const { return det_to_gt[det] >= 0; }
};

/// Processing order for matching: descending score, ties by `tiebreak`
/// (ascending), then by input index.
inline std::vector<std::size_t> score_order(std::span<const double> scores, std::span<const std::size_t> tiebreak = {}) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (!tiebreak.empty() && tiebreak[a] != tiebreak[b]) return tiebreak[a] < tiebreak[b];
    return a < b;
  });
  return order;
}

/// Greedy matching on a precomputed IoU matrix (ious[d][g]). Detections are
/// visited in `order`; each takes the unmatched ground truth with the highest
/// IoU >= threshold (ties: lowest ground-truth index).
inline MatchResult match_with_ious(const std::vector<std::vector<double>>& ious, std::size_t n_gt,
                                   std::span<const std::size_t> order, double threshold) {
  MatchResult m{std::vector<int>(ious.size(), -1), std::vector<int>(n_gt, -1)};
  for (std::size_t d : order) {
    int best = -1;
    double best_iou = threshold;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (m.gt_to_det[g] >= 0) continue;
      const double v = ious[d][g];
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      m.det_to_gt[d] = best;
      m.gt_to_det[static_cast<std::size_t>(best)] = static_cast<int>(d);
    }
  }
  return m;
}

/// Greedy matching for one image and one category.
template <class Box, class IouFn>
MatchResult match_detections(std::span<const Box> dets, std::span<const double> scores, std::span<const Box> gts,
                             double iou_threshold, IouFn iou_fn) {
  std::vector<std::vector<double>> ious(dets.size(), std::vector<double>(gts.size()));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) ious[d][g] = iou_fn(dets[d], gts[g]);
  }
  const auto order = score_order(scores);
  return match_with_ious(ious, gts.size(), order, iou_threshold);
}

/// Ranked precision/recall points of one category at one IoU threshold.
struct PrCurve {
  std::vector<double> recall;
  std::vector<double> precision;
  std::vector<double> scores;
  std::size_t n_gt = 0;
};

/// Builds the curve from detections already in rank order.
inline PrCurve make_pr_curve(const std::vector<bool>& tp_in_rank_order, std::span<const double> scores_in_rank_order,
                             std::size_t n_gt) {
  PrCurve c;
  c.n_gt = n_gt;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < tp_in_rank_order.size(); ++i) {
    if (tp_in_rank_order[i]) ++tp;
    const double denom = static_cast<double>(i + 1);
    c.recall.push_back(n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0);
    c.precision.push_back(static_cast<double>(tp) / denom);
    c.scores.push_back(scores_in_rank_order[i]);
  }
  return c;
}

/// Recall levels 0.00, 0.01, ..., 1.00 (k * 0.01, last exactly 1).
inline const std::vector<double>& recall_levels() {
  static const std::vector<double> levels = [] {
    std::vector<double> r(101);
    for (int k = 0; k < 101; ++k) r[static_cast<std::size_t>(k)] = k * 0.01;
    r.back() = 1.0;
    return r;
  }();
  return levels;
}

/// 101-point interpolated AP: mean over recall levels r of
/// max{precision(r') : r' >= r}, zero where recall r is never reached.
/// Returns nullopt when the category has no ground truth.
inline std::optional<double> average_precision(const PrCurve& curve) {
  if (curve.n_gt == 0) return std::nullopt;
  std::vector<double> envelope = curve.precision;
  for (std::size_t i = envelope.size(); i-- > 1;) envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  double sum = 0.0;
  for (double r : recall_levels()) {
    auto it = std::lower_bound(curve.recall.begin(), curve.recall.end(), r);
    if (it != curve.recall.end()) sum += envelope[static_cast<std::size_t>(it - curve.recall.begin())];
  }
  return sum / static_cast<double>(recall_levels().size());
}

struct OperatingPoint {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double score_threshold = 1.0;
};

/// Best-F1 point over score thresholds. Only the last rank of each group of
/// equal scores is a valid cut; ties in F1 keep the higher threshold.
inline OperatingPoint best_f1(const PrCurve& c) {
  OperatingPoint best;
  for (std::size_t i = 0; i < c.scores.size(); ++i) {
    if (i + 1 < c.scores.size() && c.scores[i + 1] == c.scores[i]) continue;
    const double p = c.precision[i], r = c.recall[i];
    const double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (f1 > best.f1) best = {p, r, f1, c.scores[i]};
  }
  return best;
}

/// IoU thresholds 0.50, 0.55, ..., 0.95 (0.5 + i * 0.45/9, last exactly 0.95).
inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t(10);
  const double step = (0.95 - 0.5) / 9.0;
  for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = 0.5 + i * step;
  t.back() = 0.95;
  return t;
}

struct EvalConfig {
  GeometryKind geometry = GeometryKind::aabb;
  SplitFilter split{Split::test};
  std::vector<double> iou_thresholds = coco_iou_thresholds();
  std::size_t max_dets = 100;  // per image and category
};

struct CategoryResult {
  std::string name;
  std::size_t n_gt = 0;
  std::size_t n_det = 0;
  bool valid = false;             // false when n_gt == 0 (reported as n/a)
  std::vector<double> ap;         // per IoU threshold
  double ap_50_95 = 0.0;
  double ap_50 = 0.0;
  OperatingPoint operating_point; // at IoU 0.50
  double ar = 0.0;                // mean over thresholds of final recall
};

struct EvalSummary {
  GeometryKind geometry = GeometryKind::aabb;
  std::string level = "leaf";
  std::vector<double> iou_thresholds;
  std::vector<CategoryResult> categories;
  std::size_t valid_categories = 0;
  double map_50_95 = 0.0;
  double map_50 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double ar = 0.0;

  const CategoryResult* find(std::string_view name) const {
    for (const CategoryResult& c : categories) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline Geometry gt_geometry(const InstanceRecord& r, GeometryKind kind) {
  if (kind == GeometryKind::aabb) return r.aabb;
  return r.obb;
}

// Canonical rank of every detection, independent of input order: sort by
// (image, category, geometry) and use the position as tie-break key. Boxes
// are compared in canonical OBB form, so an AABB and its theta = 0 OBB get
// the same rank.
inline std::vector<std::size_t> canonical_keys(std::span<const Detection> dets) {
  auto fields = [](const Geometry& g) {
    Obb o;
    if (const Aabb* a = std::get_if<Aabb>(&g)) {
      o = canonical_obb(Obb{a->x + a->w / 2.0, a->y + a->h / 2.0, a->w, a->h, 0.0});
    } else {
      o = canonical_obb(std::get<Obb>(g));
    }
    return std::array<double, 5>{o.cx, o.cy, o.w, o.h, o.theta};
  };
  std::vector<std::size_t> idx(dets.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(dets[a].image_id, dets[a].category_id) < std::tie(dets[b].image_id, dets[b].category_id) ||
           (std::tie(dets[a].image_id, dets[a].category_id) == std::tie(dets[b].image_id, dets[b].category_id) &&
            fields(dets[a].geometry) < fields(dets[b].geometry));
  });
  std::vector<std::size_t> key(dets.size());
  for (std::size_t r = 0; r < idx.size(); ++r) key[idx[r]] = r;
  return key;
}

struct RankedDet {
  double score;
  std::size_t key;
  bool tp;
};

template <class GtLabel, class DetLabel>
EvalSummary evaluate_labeled(const CorpusDataset& ds, std::span<const Detection> dets, const EvalConfig& cfg,
                             const std::vector<std::string>& categories, GtLabel gt_label, DetLabel det_label,
                             std::string level_name) {
  for (const Detection& d : dets) {
    if (kind_of(d.geometry) != cfg.geometry) {
      throw DataError("detections are " + std::string(to_string(kind_of(d.geometry))) + " but evaluation uses " +
                      std::string(to_string(cfg.geometry)));
    }
  }
  const std::size_t n_thr = cfg.iou_thresholds.size();
  const auto it50 = std::find_if(cfg.iou_thresholds.begin(), cfg.iou_thresholds.end(),
                                 [](double t) { return std::abs(t - 0.5) < 1e-12; });
  const std::size_t t50 = it50 == cfg.iou_thresholds.end() ? 0 : static_cast<std::size_t>(it50 - cfg.iou_thresholds.begin());

  std::map<std::string, std::size_t> cat_pos;
  for (std::size_t k = 0; k < categories.size(); ++k) cat_pos.emplace(categories[k], k);
  const std::vector<std::size_t> keys = canonical_keys(dets);

  // (image, category) -> detection indices
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> det_groups;
  std::vector<std::size_t> n_det(categories.size(), 0);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    auto it = cat_pos.find(det_label(dets[i]));
    if (it == cat_pos.end()) continue;
    det_groups[{dets[i].image_id, it->second}].push_back(i);
  }

  std::vector<std::size_t> n_gt(categories.size(), 0);
  std::vector<std::vector<std::vector<RankedDet>>> ranked(categories.size(), std::vector<std::vector<RankedDet>>(n_thr));

  for (const ImageRecord& im : ds.images) {
    if (!cfg.split.accepts(im.split)) continue;
    std::map<std::size_t, std::vector<Geometry>> gts;
    for (const InstanceRecord& r : im.instances) {
      auto it = cat_pos.find(gt_label(r));
      if (it == cat_pos.end()) continue;
      gts[it->second].push_back(gt_geometry(r, cfg.geometry));
    }
    std::set<std::size_t> touched;
    for (const auto& [k, _] : gts) touched.insert(k);
    for (auto it = det_groups.lower_bound({im.image_id, 0});
         it != det_groups.end() && it->first.first == im.image_id; ++it) {
      touched.insert(it->first.second);
    }

    for (std::size_t k : touched) {
      const std::vector<Geometry>& g = gts[k];
      n_gt[k] += g.size();
      std::vector<std::size_t> idx;
      if (auto it = det_groups.find({im.image_id, k}); it != det_groups.end()) idx = it->second;
      std::vector<double> scores;
      std::vector<std::size_t> tkeys;
      for (std::size_t i : idx) {
        scores.push_back(dets[i].score);
        tkeys.push_back(keys[i]);
      }
      std::vector<std::size_t> order = score_order(scores, tkeys);
      if (order.size() > cfg.max_dets) order.resize(cfg.max_dets);
      n_det[k] += order.size();

      std::vector<std::vector<double>> ious(idx.size(), std::vector<double>(g.size(), 0.0));
      for (std::size_t d : order) {
        for (std::size_t j = 0; j < g.size(); ++j) ious[d][j] = iou(dets[idx[d]].geometry, g[j]);
      }
      for (std::size_t t = 0; t < n_thr; ++t) {
        const MatchResult m = match_with_ious(ious, g.size(), order, cfg.iou_thresholds[t]);
        for (std::size_t d : order) ranked[k][t].push_back({scores[d], tkeys[d], m.is_tp(d)});
      }
    }
  }

  EvalSummary s;
  s.geometry = cfg.geometry;
  s.level = std::move(level_name);
  s.iou_thresholds = cfg.iou_thresholds;
  double sum_ap = 0.0, sum_ap50 = 0.0, sum_p = 0.0, sum_r = 0.0, sum_ar = 0.0;
  for (std::size_t k = 0; k < categories.size(); ++k) {
    CategoryResult cr;
    cr.name = categories[k];
    cr.n_gt = n_gt[k];
    cr.n_det = n_det[k];
    cr.valid = n_gt[k] > 0;
    if (cr.valid) {
      double ar_sum = 0.0;
      for (std::size_t t = 0; t < n_thr; ++t) {
        std::vector<RankedDet>& rd = ranked[k][t];
        std::sort(rd.begin(), rd.end(), [](const RankedDet& a, const RankedDet& b) {
          return a.score != b.score ? a.score > b.score : a.key < b.key;
        });
        std::vector<bool> tp;
        std::vector<double> sc;
        for (const RankedDet& r : rd) {
          tp.push_back(r.tp);
          sc.push_back(r.score);
        }
        const PrCurve curve = make_pr_curve(tp, sc, n_gt[k]);
        cr.ap.push_back(*average_precision(curve));
        ar_sum += curve.recall.empty() ? 0.0 : curve.recall.back();
        if (t == t50) cr.operating_point = best_f1(curve);
      }
      double ap_sum = 0.0;
      for (double a : cr.ap) ap_sum += a;
      cr.ap_50_95 = n_thr > 0 ? ap_sum / static_cast<double>(n_thr) : 0.0;
      cr.ap_50 = n_thr > 0 ? cr.ap[t50] : 0.0;
      cr.ar = n_thr > 0 ? ar_sum / static_cast<double>(n_thr) : 0.0;
      ++s.valid_categories;
      sum_ap += cr.ap_50_95;
      sum_ap50 += cr.ap_50;
      sum_p += cr.operating_point.precision;
      sum_r += cr.operating_point.recall;
      sum_ar += cr.ar;
    }
    s.categories.push_back(std::move(cr));
  }
  if (s.valid_categories > 0) {
    const double n = static_cast<double>(s.valid_categories);
    s.map_50_95 = sum_ap / n;
    s.map_50 = sum_ap50 / n;
    s.precision = sum_p / n;
    s.recall = sum_r / n;
    s.ar = sum_ar / n;
  }
  return s;
}

}  // namespace detail

/// Evaluates detections against the selected split at leaf level (the
/// dataset's own categories).
inline EvalSummary evaluate(const CorpusDataset& ds, std::span<const Detection> dets, const EvalConfig& cfg = {}) {
  const std::vector<std::string> categories = level_categories(ds, LabelLevel::leaf());
  return detail::evaluate_labeled(
      ds, dets, cfg, categories, [](const InstanceRecord& r) -> const std::string& { return r.category(); },
      [&](const Detection& d) -> const std::string& { return ds.categories.at(static_cast<std::size_t>(d.category_id)).name; },
      "leaf");
}

/// Re-labels ground truth and detections to their ancestor at `level`
/// (or their deepest label when the path is shorter) and evaluates.
inline EvalSummary evaluate_rollup(const CorpusDataset& ds, std::span<const Detection> dets, const Ontology& o,
                                   LabelLevel level, const EvalConfig& cfg = {}) {
  if (!ds.is_label_expanded()) throw DataError("roll-up evaluation needs a label-expanded dataset");
  std::map<int, std::string> det_names;
  for (const CategoryDef& c : ds.categories) det_names[c.id] = o.path(c.name).at(level);
  const std::vector<std::string> categories = level_categories(ds, level);
  return detail::evaluate_labeled(
      ds, dets, cfg, categories, [level](const InstanceRecord& r) -> const std::string& { return r.category(level); },
      [&](const Detection& d) -> const std::string& { return det_names.at(d.category_id); }, level.name());
}

inline std::string summary_to_json(const EvalSummary& s) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["geometry"] = to_string(s.geometry);
  doc["level"] = s.level;
  doc["iou_thresholds"] = s.iou_thresholds;
  doc["mAP@.50:.95"] = s.map_50_95;
  doc["mAP@.50"] = s.map_50;
  doc["precision_best_f1"] = s.precision;
  doc["recall_best_f1"] = s.recall;
  doc["AR@100"] = s.ar;
  doc["valid_categories"] = s.valid_categories;
  doc["categories"] = json::array();
  for (const CategoryResult& c : s.categories) {
    json j{{"name", c.name}, {"n_gt", c.n_gt}, {"n_det", c.n_det}};
    if (!c.valid) {
      j["AP"] = "n/a";
    } else {
      j["AP"] = c.ap;
      j["AP@.50:.95"] = c.ap_50_95;
      j["AP@.50"] = c.ap_50;
      j["precision"] = c.operating_point.precision;
      j["recall"] = c.operating_point.recall;
      j["f1"] = c.operating_point.f1;
      j["score_threshold"] = c.operating_point.score_threshold;
      j["AR@100"] = c.ar;
    }
    doc["categories"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

/// Plain-text table: one row per category, metric columns, mean row last.
inline std::string summary_to_table(const EvalSummary& s) {
  std::size_t width = 8;
  for (const CategoryResult& c : s.categories) width = std::max(width, c.name.size());
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  auto row = [&](const std::string& name, const std::vector<std::string>& cells) {
    std::string line = name + std::string(width - name.size(), ' ');
    for (const std::string& c : cells) line += "  " + std::string(c.size() < 11 ? 11 - c.size() : 0, ' ') + c;
    return line + "\n";
  };
  std::string out = row("Class", {"mAP@.50:.95", "mAP@.50", "P", "R", "AR@100"});
  out += std::string(width + 5 * 13, '-') + "\n";
  for (const CategoryResult& c : s.categories) {
    if (!c.valid) {
      out += row(c.name, {"n/a", "n/a", "n/a", "n/a", "n/a"});
    } else {
      out += row(c.name, {num(c.ap_50_95), num(c.ap_50), num(c.operating_point.precision),
                          num(c.operating_point.recall), num(c.ar)});
    }
  }
  out += std::string(width + 5 * 13, '-') + "\n";
  out += row("Average", {num(s.map_50_95), num(s.map_50), num(s.precision), num(s.recall), num(s.ar)});
  return out;
}

}  // namespace folio
