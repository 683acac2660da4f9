#pragma once

// Command-line front end: convert, harmonize, split, stats, eval, profile.
// Exit codes: 0 ok, 1 data error, 2 usage/config error. Logs go to `err`,
// reports to `out`, datasets and exports to files.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "folio/coco.hpp"
#include "folio/corpus.hpp"
#include "folio/evaluation.hpp"
#include "folio/export.hpp"
#include "folio/ontology.hpp"
#include "folio/page_xml.hpp"
#include "folio/pipeline.hpp"
#include "folio/profiler.hpp"

namespace folio::cli {

/// Bad flags, missing inputs or invalid run configuration (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;
using json = nlohmann::json;

enum class SourceFormat { page_xml, coco };

inline SourceFormat parse_source_format(std::string_view s) {
  if (s == "page-xml" || s == "page_xml" || s == "pagexml") return SourceFormat::page_xml;
  if (s == "coco") return SourceFormat::coco;
  throw UsageError("unknown source format '" + std::string(s) + "' (expected page-xml or coco)");
}

struct CorpusSource {
  CorpusId id = CorpusId::merged;
  SourceFormat format = SourceFormat::page_xml;
  std::vector<fs::path> inputs;
  std::optional<fs::path> split_manifest;
  PagePolicy policy;
  std::optional<FilterRules> filter;
};

struct ExportPlan {
  std::vector<ExportFormat> formats;
  std::vector<LabelLevel> levels{LabelLevel::leaf()};
  int precision = 6;
};

struct RunConfig {
  std::vector<CorpusSource> corpora;
  std::optional<fs::path> ontology;
  FilterRules filter;
  SplitSpec split;
  ExportPlan exports;
  std::optional<fs::path> output;
};

namespace detail {

inline std::vector<fs::path> collect_documents(const std::vector<fs::path>& inputs, std::string_view extension) {
  std::vector<fs::path> docs;
  for (const fs::path& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == extension) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      docs.insert(docs.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(in)) {
      docs.push_back(in);
    } else {
      throw UsageError("input not found: " + in.string());
    }
  }
  return docs;
}

inline void report(std::ostream& err, const Diagnostics& diag) {
  for (const std::string& w : diag.warnings) err << "warning: " << w << "\n";
}

inline CorpusDataset ingest(const CorpusSource& src, std::ostream& err) {
  Diagnostics diag;
  CorpusDataset ds;
  if (src.format == SourceFormat::page_xml) {
    const auto docs = collect_documents(src.inputs, ".xml");
    if (docs.empty()) throw UsageError("no input documents");
    std::vector<ImageRecord> images;
    for (const fs::path& p : docs) {
      try {
        images.push_back(parse_page_xml(read_file(p), src.policy, &diag));
      } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what());
      }
    }
    ds = assemble_dataset(src.id, std::move(images), src.policy);
  } else {
    const auto docs = collect_documents(src.inputs, ".json");
    if (docs.empty()) throw UsageError("no input documents");
    if (docs.size() > 1) throw UsageError("COCO input takes exactly one file");
    ds = parse_coco(read_file(docs.front()), src.id, &diag);
    if (src.id != CorpusId::merged) ds.corpus_id = src.id;
  }
  report(err, diag);
  if (src.split_manifest) {
    SplitSpec spec;
    spec.force = true;
    spec.test_manifest = parse_split_manifest(read_file(*src.split_manifest));
    ds = split_dataset(ds, spec);
  }
  return ds;
}

inline CorpusDataset load_dataset(const fs::path& path, const std::optional<fs::path>& manifest, std::ostream& err) {
  Diagnostics diag;
  CorpusDataset ds = parse_coco(read_file(path), CorpusId::merged, &diag);
  report(err, diag);
  if (manifest) {
    SplitSpec spec;
    spec.force = true;
    spec.test_manifest = parse_split_manifest(read_file(*manifest));
    ds = split_dataset(ds, spec);
  }
  return ds;
}

inline Ontology load_ontology_file(const std::optional<fs::path>& path) {
  if (!path) return default_ontology();
  try {
    return load_ontology(read_file(*path));
  } catch (const OntologyError& e) {
    throw UsageError(std::string("ontology: ") + e.what());
  }
}

/// dataset.json + manifest.json + exports/<level>/<format>/...
inline FileSet render_outputs(const CorpusDataset& ds, const ExportPlan& plan) {
  FileSet files;
  files.add("dataset.json", write_coco_aabb(ds, {}));
  files.add("manifest.json", write_manifest(ds, {}));
  for (const LabelLevel& level : plan.levels) {
    for (ExportFormat f : plan.formats) {
      ExportSpec spec{f, level, {}, plan.precision};
      files.append(export_dataset(ds, spec),
                   "exports/" + level.name() + "/" + std::string(to_string(f)) + "/");
    }
  }
  return files;
}

inline std::vector<LabelLevel> parse_levels(const std::vector<std::string>& raw) {
  std::vector<LabelLevel> out;
  for (const std::string& s : raw) {
    try {
      out.push_back(LabelLevel::parse(s));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

inline std::vector<ExportFormat> parse_formats(const std::vector<std::string>& raw) {
  std::vector<ExportFormat> out;
  for (const std::string& s : raw) {
    try {
      out.push_back(parse_export_format(s));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

inline FilterRules parse_filter(const json& j) {
  FilterRules r;
  r.drop_line_level = j.value("drop_line_level", false);
  if (auto it = j.find("line_level_tags"); it != j.end()) r.line_level_tags = it->get<std::vector<std::string>>();
  if (auto it = j.find("retain_only_tags_present_in"); it != j.end() && !it->is_null()) {
    r.retain_only_tags_present_in = parse_split(it->get<std::string>());
  }
  if (auto it = j.find("keep_tags"); it != j.end() && !it->is_null()) {
    r.explicit_keep_tags = it->get<std::vector<std::string>>();
  }
  r.validate();
  return r;
}

inline SplitFilter parse_split_flag(const std::string& s) {
  try {
    return SplitFilter::parse(s);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

inline void print_summary(std::ostream& out, const CorpusDataset& ds, std::size_t warnings) {
  out << "images: " << ds.images.size() << "\n"
      << "instances: " << ds.instance_count() << "\n"
      << "categories: " << ds.categories.size() << "\n"
      << "warnings: " << warnings << "\n";
}

}  // namespace detail

/// Parses a run-config JSON document. Relative paths resolve against `base`.
inline RunConfig parse_run_config(std::string_view text, const fs::path& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("run config: ") + e.what());
  }
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  RunConfig cfg;
  try {
    if (doc.contains("ontology")) cfg.ontology = resolve(doc["ontology"].get<std::string>());
    if (doc.contains("output")) cfg.output = resolve(doc["output"].get<std::string>());
    if (doc.contains("filter")) cfg.filter = detail::parse_filter(doc["filter"]);
    if (auto s = doc.find("split"); s != doc.end()) {
      cfg.split.trainval_fraction = s->value("fraction", 0.9);
      cfg.split.seed = s->value("seed", std::uint64_t{0});
    }
    if (auto e = doc.find("exports"); e != doc.end()) {
      cfg.exports.formats = detail::parse_formats(e->value("formats", std::vector<std::string>{}));
      if (e->contains("levels")) cfg.exports.levels = detail::parse_levels((*e)["levels"].get<std::vector<std::string>>());
      cfg.exports.precision = e->value("precision", 6);
    }
    std::set<CorpusId> ids;
    for (const json& c : doc.at("corpora")) {
      CorpusSource src;
      src.id = parse_corpus_id(c.at("id").get<std::string>());
      if (!ids.insert(src.id).second) throw UsageError("duplicate corpus id " + std::string(to_string(src.id)));
      src.format = parse_source_format(c.at("format").get<std::string>());
      for (const json& in : c.at("inputs")) src.inputs.push_back(resolve(in.get<std::string>()));
      if (c.contains("split_manifest")) src.split_manifest = resolve(c["split_manifest"].get<std::string>());
      if (c.contains("rename")) src.policy.rename = c["rename"].get<std::map<std::string, std::string>>();
      if (c.contains("accepted_tags")) src.policy.accepted_tags = c["accepted_tags"].get<std::vector<std::string>>();
      if (c.contains("filter")) src.filter = detail::parse_filter(c["filter"]);
      cfg.corpora.push_back(std::move(src));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("run config: ") + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("run config: ") + e.what());
  }
  if (cfg.corpora.empty()) throw UsageError("run config declares no corpora");
  auto check = [](const fs::path& p) {
    if (!fs::exists(p)) throw UsageError("path does not exist: " + p.string());
  };
  for (const CorpusSource& c : cfg.corpora) {
    for (const fs::path& p : c.inputs) check(p);
    if (c.split_manifest) check(*c.split_manifest);
  }
  if (cfg.ontology) check(*cfg.ontology);
  return cfg;
}

namespace detail {

struct Options {
  // shared
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> formats;
  std::string geometry = "aabb";
  std::vector<std::string> levels;
  std::string split_manifest;
  std::string ontology;
  // convert
  std::string from;
  std::string corpus = "merged";
  std::vector<std::string> inputs;
  bool drop_line_level = false;
  std::string retain_present_in;
  std::vector<std::string> keep_tags;
  int precision = 6;
  // split
  std::string dataset;
  double fraction = 0.9;
  bool force = false;
  // stats / eval / profile
  std::string split = "test";
  std::string json_out;
  std::string detections;
  std::vector<std::string> datasets;
};

inline std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

inline int cmd_convert(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusSource src;
  src.format = parse_source_format(o.from);
  try {
    src.id = parse_corpus_id(o.corpus);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  for (const std::string& in : o.inputs) src.inputs.emplace_back(in);
  src.split_manifest = opt_path(o.split_manifest);
  if (src.inputs.empty()) throw UsageError("no input documents");
  if (o.out.empty()) throw UsageError("--out is required");

  std::ostringstream warn_log;
  CorpusDataset ds = ingest(src, warn_log);
  const std::string warnings = warn_log.str();
  err << warnings;
  const auto n_warn = static_cast<std::size_t>(std::count(warnings.begin(), warnings.end(), '\n'));

  if (o.seed && !src.split_manifest) {
    SplitSpec spec;
    spec.seed = *o.seed;
    spec.trainval_fraction = o.fraction;
    spec.force = true;
    ds = split_dataset(ds, spec);
  }
  FilterRules rules;
  rules.drop_line_level = o.drop_line_level;
  if (!o.retain_present_in.empty()) rules.retain_only_tags_present_in = parse_split(o.retain_present_in);
  if (!o.keep_tags.empty()) rules.explicit_keep_tags = o.keep_tags;
  try {
    rules.validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  ds = filter_dataset(ds, rules);
  attach_phrases(ds, load_ontology_file(opt_path(o.ontology)));

  ExportPlan plan;
  plan.formats = parse_formats(o.formats.empty() ? std::vector<std::string>{"coco-aabb"} : o.formats);
  if (!o.levels.empty()) plan.levels = parse_levels(o.levels);
  plan.precision = o.precision;
  commit(render_outputs(ds, plan), o.out);
  print_summary(out, ds, n_warn);
  return 0;
}

inline int cmd_harmonize(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.config.empty()) throw UsageError("--config is required");
  const fs::path config_path(o.config);
  if (!fs::exists(config_path)) throw UsageError("config not found: " + o.config);
  RunConfig cfg = parse_run_config(read_file(config_path), config_path.parent_path());
  if (!o.out.empty()) cfg.output = fs::path(o.out);
  if (o.seed) cfg.split.seed = *o.seed;
  if (!o.formats.empty()) cfg.exports.formats = parse_formats(o.formats);
  if (!o.levels.empty()) cfg.exports.levels = parse_levels(o.levels);
  if (!o.ontology.empty()) cfg.ontology = fs::path(o.ontology);
  if (!cfg.output) throw UsageError("no output directory (config 'output' or --out)");
  const Ontology onto = load_ontology_file(cfg.ontology);

  std::vector<CorpusDataset> parts;
  std::ostringstream warn_log;
  for (const CorpusSource& src : cfg.corpora) {
    CorpusDataset ds = ingest(src, warn_log);
    const bool unassigned = std::any_of(ds.images.begin(), ds.images.end(),
                                        [](const ImageRecord& im) { return im.split == Split::unassigned; });
    if (unassigned && !ds.images.empty()) {
      SplitSpec spec = cfg.split;
      spec.force = true;
      ds = split_dataset(ds, spec);
    }
    ds = filter_dataset(ds, src.filter.value_or(cfg.filter));
    parts.push_back(std::move(ds));
  }
  const std::string warnings = warn_log.str();
  err << warnings;
  CorpusDataset merged = merge_corpora(parts, onto);
  commit(render_outputs(merged, cfg.exports), *cfg.output);
  out << "corpora: " << parts.size() << "\n";
  print_summary(out, merged, static_cast<std::size_t>(std::count(warnings.begin(), warnings.end(), '\n')));
  return 0;
}

inline int cmd_split(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.dataset.empty() || o.out.empty()) throw UsageError("--dataset and --out are required");
  CorpusDataset ds = load_dataset(o.dataset, std::nullopt, err);
  SplitSpec spec;
  spec.trainval_fraction = o.fraction;
  spec.seed = o.seed.value_or(0);
  spec.force = o.force;
  if (!o.split_manifest.empty()) spec.test_manifest = parse_split_manifest(read_file(o.split_manifest));
  ds = split_dataset(ds, spec);
  FileSet files;
  files.add("dataset.json", write_coco_aabb(ds, {}));
  files.add("test_ids.txt", write_split_manifest(ds));
  files.add("manifest.json", write_manifest(ds, {}));
  commit(files, o.out);
  const auto summary = split_summary(ds);
  out << "trainval: " << summary.at(Split::trainval).images << "\n"
      << "test: " << summary.at(Split::test).images << "\n";
  return 0;
}

inline int cmd_stats(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.dataset.empty()) throw UsageError("--dataset is required");
  const CorpusDataset ds = load_dataset(o.dataset, opt_path(o.split_manifest), err);
  const LabelLevel level = o.levels.empty() ? LabelLevel::leaf() : parse_levels(o.levels).front();
  const SplitFilter split = parse_split_flag(o.split);
  const auto summary = split_summary(ds);
  const auto counts = class_counts(ds, split, level);
  std::size_t total = 0;
  for (const ClassCount& c : counts) total += c.count;

  out << "corpus: " << to_string(ds.corpus_id) << "\n"
      << "classes used: " << counts.size() << "\n"
      << "trainval images: " << summary.at(Split::trainval).images << "\n"
      << "test images: " << summary.at(Split::test).images << "\n"
      << "test instances: " << summary.at(Split::test).instances << "\n\n";
  std::size_t width = 5;
  for (const ClassCount& c : counts) width = std::max(width, c.category.size());
  out << "Class" << std::string(width - 5, ' ') << "  Count\n";
  for (const ClassCount& c : counts) {
    const std::string n = std::to_string(c.count);
    out << c.category << std::string(width - c.category.size(), ' ') << "  " << std::string(n.size() < 5 ? 5 - n.size() : 0, ' ')
        << n << "\n";
  }
  out << "Total (" << o.split << ", level " << level.name() << "): " << total << "\n";

  if (!o.json_out.empty()) {
    nlohmann::ordered_json j;
    j["corpus_id"] = to_string(ds.corpus_id);
    j["split"] = o.split;
    j["level"] = level.name();
    for (Split s : {Split::trainval, Split::test, Split::unassigned}) {
      j["images"][std::string(to_string(s))] = summary.at(s).images;
      j["instances"][std::string(to_string(s))] = summary.at(s).instances;
    }
    j["class_counts"] = nlohmann::ordered_json::array();
    for (const ClassCount& c : counts) j["class_counts"].push_back({{"category", c.category}, {"count", c.count}});
    j["total"] = total;
    FileSet f;
    f.add(fs::path(o.json_out).filename().string(), j.dump(2) + "\n");
    commit(f, fs::path(o.json_out).parent_path());
  }
  return 0;
}

inline int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.dataset.empty() || o.detections.empty()) throw UsageError("--dataset and --detections are required");
  const CorpusDataset ds = load_dataset(o.dataset, opt_path(o.split_manifest), err);
  const DetectionSet dets = load_detections(read_file(o.detections), ds);
  EvalConfig cfg;
  try {
    cfg.geometry = parse_geometry_kind(o.geometry);
    cfg.split = SplitFilter::parse(o.split);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  const LabelLevel level = o.levels.empty() ? LabelLevel::leaf() : parse_levels(o.levels).front();
  const EvalSummary s = level.is_leaf()
                            ? evaluate(ds, dets.items, cfg)
                            : evaluate_rollup(ds, dets.items, load_ontology_file(opt_path(o.ontology)), level, cfg);
  out << summary_to_table(s);
  char line[64];
  std::snprintf(line, sizeof line, "mAP@.50:.95 = %.3f\n", s.map_50_95);
  out << line;
  if (!o.out.empty()) {
    FileSet f;
    f.add(fs::path(o.out).filename().string(), summary_to_json(s));
    commit(f, fs::path(o.out).parent_path());
  }
  return 0;
}

inline int cmd_profile(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.datasets.empty() || o.out.empty()) throw UsageError("--dataset and --out are required");
  const SplitFilter split = parse_split_flag(o.split);
  const LabelLevel level = o.levels.empty() ? LabelLevel::leaf() : parse_levels(o.levels).front();
  std::vector<ComplexityProfile> profiles;
  for (const std::string& path : o.datasets) {
    profiles.push_back(complexity_profile(load_dataset(path, std::nullopt, err), split, level));
  }
  FileSet f;
  f.add("profile.csv", emit_profile_csv(profiles));
  f.add("profile.svg", emit_profile_svg(profiles));
  commit(f, o.out);
  std::size_t rows = 0;
  for (const auto& p : profiles) rows += p.rows.size();
  out << "profile rows: " << rows << "\n";
  return 0;
}

}  // namespace detail

/// Runs the CLI on argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"folio: manuscript layout annotation harmonization and evaluation", "folio"};
  app.require_subcommand(1);
  detail::Options o;

  auto shared = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run-config JSON file");
    sub->add_option("--seed", o.seed, "Seed for the split shuffle");
    sub->add_option("--ontology", o.ontology, "Ontology JSON (default: shipped ontology)");
  };

  CLI::App* convert = app.add_subcommand("convert", "Convert PAGE XML or COCO annotations to training formats");
  shared(convert);
  convert->add_option("--from", o.from, "Source format: page-xml | coco")->required();
  convert->add_option("--input,-i", o.inputs, "Input files or directories");
  convert->add_option("--corpus", o.corpus, "Corpus id: endp | catmus | horae | merged");
  convert->add_option("--to,--format", o.formats, "Output format(s): coco-aabb | yolo-aabb | yolo-obb");
  convert->add_option("--level", o.levels, "Label level(s): leaf | 1 | 2 ...");
  convert->add_option("--out", o.out, "Output directory");
  convert->add_option("--split-manifest", o.split_manifest, "Test image ids, one per line");
  convert->add_option("--fraction", o.fraction, "Trainval fraction for --seed splits");
  convert->add_flag("--drop-line-level", o.drop_line_level, "Drop line-level annotations");
  convert->add_option("--retain-present-in", o.retain_present_in, "Keep only categories present in this split");
  convert->add_option("--keep-tags", o.keep_tags, "Keep only these categories");
  convert->add_option("--precision", o.precision, "Decimal places for normalized coordinates");

  CLI::App* harmonize = app.add_subcommand("harmonize", "Filter, label-expand and merge corpora under the ontology");
  shared(harmonize);
  harmonize->add_option("--out", o.out, "Output directory (overrides config)");
  harmonize->add_option("--format", o.formats, "Output format(s) (override config)");
  harmonize->add_option("--level", o.levels, "Label level(s) (override config)");

  CLI::App* split = app.add_subcommand("split", "Assign trainval/test splits");
  shared(split);
  split->add_option("--dataset", o.dataset, "dataset.json (COCO)")->required();
  split->add_option("--out", o.out, "Output directory")->required();
  split->add_option("--fraction", o.fraction, "Trainval fraction (default 0.9)");
  split->add_option("--split-manifest", o.split_manifest, "Test image ids, one per line");
  split->add_flag("--force", o.force, "Reassign existing splits");

  CLI::App* stats = app.add_subcommand("stats", "Dataset and per-class statistics");
  shared(stats);
  stats->add_option("--dataset", o.dataset, "dataset.json (COCO)")->required();
  stats->add_option("--split-manifest", o.split_manifest, "Test image ids, one per line");
  stats->add_option("--split", o.split, "trainval | test | all (default test)");
  stats->add_option("--level", o.levels, "Label level: leaf | 1 | 2 ...");
  stats->add_option("--json", o.json_out, "Also write the statistics as JSON");

  CLI::App* eval = app.add_subcommand("eval", "COCO-protocol evaluation of detections");
  shared(eval);
  eval->add_option("--dataset", o.dataset, "dataset.json (COCO)")->required();
  eval->add_option("--detections", o.detections, "COCO results JSON (bbox or obb)")->required();
  eval->add_option("--geometry", o.geometry, "aabb | obb (default aabb)");
  eval->add_option("--level", o.levels, "leaf | 1 | 2 ... (non-leaf = roll-up)");
  eval->add_option("--split", o.split, "trainval | test | all (default test)");
  eval->add_option("--split-manifest", o.split_manifest, "Test image ids, one per line");
  eval->add_option("--out", o.out, "Write the full report as JSON");

  CLI::App* profile = app.add_subcommand("profile", "Aspect-ratio complexity profile (CSV + SVG)");
  shared(profile);
  profile->add_option("--dataset", o.datasets, "dataset.json file(s), one per corpus")->required();
  profile->add_option("--split", o.split, "trainval | test | all (default test)");
  profile->add_option("--level", o.levels, "Label level: leaf | 1 | 2 ...");
  profile->add_option("--out", o.out, "Output directory")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp on the subcommand.
    if (e.get_exit_code() == 0) {
      for (CLI::App* sub : app.get_subcommands()) out << sub->help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (convert->parsed()) return detail::cmd_convert(o, out, err);
    if (harmonize->parsed()) return detail::cmd_harmonize(o, out, err);
    if (split->parsed()) return detail::cmd_split(o, out, err);
    if (stats->parsed()) return detail::cmd_stats(o, out, err);
    if (eval->parsed()) return detail::cmd_eval(o, out, err);
    if (profile->parsed()) return detail::cmd_profile(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace folio::cli
