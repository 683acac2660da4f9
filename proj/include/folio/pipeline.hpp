#pragma once

// Dataset-to-dataset transforms: filtering, deterministic splitting,
// cross-corpus merging, and per-class statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "folio/corpus.hpp"
#include "folio/ontology.hpp"

namespace folio {

/// SegmOnto line-level types; regions with these tags are never layout zones.
inline const std::vector<std::string>& default_line_level_tags() {
  static const std::vector<std::string> tags{"DefaultLine", "HeadingLine",     "InterlinearLine",
                                             "DropCapitalLine", "MusicLine", "CustomLine", "TextLine"};
  return tags;
}

struct FilterRules {
  bool drop_line_level = false;
  std::vector<std::string> line_level_tags = default_line_level_tags();
  /// Keep only categories with at least one instance in this split.
  std::optional<Split> retain_only_tags_present_in;
  /// Keep only these categories.
  std::optional<std::vector<std::string>> explicit_keep_tags;

  void validate() const {
    if (retain_only_tags_present_in && explicit_keep_tags) {
      throw DataError("filter rules: at most one retention mode may be active");
    }
  }
};

/// Removes instances of dropped categories and compacts the category
/// registry (surviving categories keep their relative order, ids 0..n-1).
/// Emptied images stay as negatives.
inline CorpusDataset filter_dataset(const CorpusDataset& ds, const FilterRules& rules) {
  rules.validate();
  std::set<std::string> drop;
  if (rules.drop_line_level) drop.insert(rules.line_level_tags.begin(), rules.line_level_tags.end());

  std::set<std::string> keep;
  const bool restrict = rules.retain_only_tags_present_in || rules.explicit_keep_tags;
  if (rules.retain_only_tags_present_in) {
    for (const ImageRecord& im : ds.images) {
      if (im.split != *rules.retain_only_tags_present_in) continue;
      for (const InstanceRecord& r : im.instances) keep.insert(r.category());
    }
  }
  if (rules.explicit_keep_tags) keep.insert(rules.explicit_keep_tags->begin(), rules.explicit_keep_tags->end());

  auto survives = [&](const std::string& name) {
    return !drop.contains(name) && (!restrict || keep.contains(name));
  };

  CorpusDataset out;
  out.corpus_id = ds.corpus_id;
  for (const CategoryDef& c : ds.categories) {
    if (survives(c.name)) out.categories.push_back(c);
  }
  renumber_categories(out.categories);
  for (const ImageRecord& im : ds.images) {
    ImageRecord copy = im;
    std::erase_if(copy.instances, [&](const InstanceRecord& r) { return !survives(r.category()); });
    out.images.push_back(std::move(copy));
  }
  return out;
}

/// SplitMix64 (Steele, Lea & Flood): state += 0x9E3779B97F4A7C15, then
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
/// return z ^ (z >> 31).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

struct SplitSpec {
  double trainval_fraction = 0.9;
  std::uint64_t seed = 0;
  /// Overwrite existing assignments.
  bool force = false;
  /// Explicit test image ids; when present they replace the seeded shuffle.
  std::optional<std::vector<std::string>> test_manifest;
};

/// Reads a split manifest: one test image id per line; blank lines and
/// lines starting with '#' are ignored.
inline std::vector<std::string> parse_split_manifest(std::string_view text) {
  std::vector<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    line.erase(0, b);
    if (line.empty() || line.front() == '#') continue;
    ids.push_back(line);
  }
  return ids;
}

inline std::string write_split_manifest(const CorpusDataset& ds) {
  std::string out;
  for (const ImageRecord& im : ds.images) {
    if (im.split == Split::test) out += im.image_id + "\n";
  }
  return out;
}

/// Number of trainval images for n images at the given fraction: floor(n*f).
inline std::size_t trainval_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

/// Assigns every image to trainval or test.
///
/// With a manifest, listed ids become test and all others trainval (unknown
/// ids are an error). Otherwise images are sorted by id, shuffled by a
/// Fisher-Yates pass driven by SplitMix64(seed) (j = next() % (i + 1) for
/// i = n-1 .. 1), and the first floor(n * fraction) go to trainval.
inline CorpusDataset split_dataset(const CorpusDataset& ds, const SplitSpec& spec) {
  if (ds.images.empty()) throw DataError("cannot split an empty dataset");
  if (!(spec.trainval_fraction > 0.0 && spec.trainval_fraction < 1.0)) {
    throw DataError("trainval fraction must lie in (0, 1)");
  }
  if (!spec.force) {
    for (const ImageRecord& im : ds.images) {
      if (im.split != Split::unassigned) {
        throw DataError("dataset already has split assignments (use force to reassign)");
      }
    }
  }
  CorpusDataset out = ds;
  if (spec.test_manifest) {
    std::set<std::string> test(spec.test_manifest->begin(), spec.test_manifest->end());
    std::set<std::string> known;
    for (ImageRecord& im : out.images) {
      known.insert(im.image_id);
      im.split = test.contains(im.image_id) ? Split::test : Split::trainval;
    }
    std::vector<std::string> unknown;
    for (const std::string& id : test) {
      if (!known.contains(id)) unknown.push_back(id);
    }
    if (!unknown.empty()) {
      std::string msg = "split manifest names unknown images:";
      for (const std::string& u : unknown) msg += " " + u;
      throw DataError(msg);
    }
    return out;
  }

  std::vector<std::size_t> order(out.images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.images[a].image_id < out.images[b].image_id; });
  SplitMix64 rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
    std::swap(order[i], order[j]);
  }
  const std::size_t n_trainval = trainval_count(order.size(), spec.trainval_fraction);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.images[order[k]].split = k < n_trainval ? Split::trainval : Split::test;
  }
  return out;
}

/// Merges corpora into one label-expanded dataset over the ontology
/// registry. Image ids are prefixed with "<corpus>:" unless the part is
/// itself a merged dataset.
inline CorpusDataset merge_corpora(const std::vector<CorpusDataset>& parts, const Ontology& o) {
  CorpusDataset merged;
  merged.corpus_id = CorpusId::merged;
  std::set<std::string> unmapped;
  for (const CorpusDataset& part : parts) {
    auto missing = unmapped_tags(part, o);
    unmapped.insert(missing.begin(), missing.end());
  }
  if (!unmapped.empty()) throw DataError(unmapped_message(unmapped));
  for (const CorpusDataset& part : parts) {
    CorpusDataset expanded = expand_labels(part, o);
    for (ImageRecord& im : expanded.images) {
      if (part.corpus_id != CorpusId::merged) {
        im.image_id = std::string(to_string(part.corpus_id)) + ":" + im.image_id;
      }
      merged.images.push_back(std::move(im));
    }
  }
  std::set<std::string> ids;
  for (const ImageRecord& im : merged.images) {
    if (!ids.insert(im.image_id).second) throw DataError("duplicate image id '" + im.image_id + "' after merge");
  }
  merged.categories = detail::ontology_registry(merged.images, o);
  return merged;
}

struct ClassCount {
  std::string category;
  std::size_t count = 0;

  friend bool operator==(const ClassCount&, const ClassCount&) = default;
};

/// Instance counts per category at `level` for the selected split, sorted
/// by descending count (ties in registry order). Categories without
/// instances are omitted.
inline std::vector<ClassCount> class_counts(const CorpusDataset& ds, SplitFilter split,
                                            LabelLevel level = LabelLevel::leaf()) {
  std::map<std::string, std::size_t> counts;
  for (const ImageRecord& im : ds.images) {
    if (!split.accepts(im.split)) continue;
    for (const InstanceRecord& r : im.instances) ++counts[r.category(level)];
  }
  std::vector<ClassCount> out;
  std::set<std::string> listed;
  for (const std::string& name : level_categories(ds, level)) {
    if (auto it = counts.find(name); it != counts.end()) {
      out.push_back({name, it->second});
      listed.insert(name);
    }
  }
  for (const auto& [name, n] : counts) {
    if (!listed.contains(name)) out.push_back({name, n});
  }
  std::stable_sort(out.begin(), out.end(), [](const ClassCount& a, const ClassCount& b) { return a.count > b.count; });
  return out;
}

struct SplitSummary {
  std::size_t images = 0;
  std::size_t instances = 0;
};

/// Image and instance totals per split.
inline std::map<Split, SplitSummary> split_summary(const CorpusDataset& ds) {
  std::map<Split, SplitSummary> out{{Split::trainval, {}}, {Split::test, {}}, {Split::unassigned, {}}};
  for (const ImageRecord& im : ds.images) {
    out[im.split].images += 1;
    out[im.split].instances += im.instances.size();
  }
  return out;
}

}  // namespace folio
