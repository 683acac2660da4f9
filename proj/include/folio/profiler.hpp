#pragma once

// Aspect-ratio complexity profile per category, with CSV and SVG output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "folio/corpus.hpp"
#include "folio/geometry.hpp"

namespace folio {

/// Linear-interpolation percentile: rank = q/100 * (n-1) on sorted values.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("percentile of an empty sequence");
  if (!(q >= 0.0 && q <= 100.0)) throw DataError("percentile q must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

struct ProfileRow {
  std::string category;
  std::size_t n = 0;
  double mean_ar = 0.0;
  double p25_ar = 0.0;
  double p75_ar = 0.0;
};

struct ComplexityProfile {
  std::string corpus_id;
  std::vector<ProfileRow> rows;
};

/// Per-category OBB aspect-ratio statistics on one split. Rows are ordered
/// by descending mean (ties by name); empty categories are omitted.
inline ComplexityProfile complexity_profile(const CorpusDataset& ds, SplitFilter split,
                                            LabelLevel level = LabelLevel::leaf()) {
  std::map<std::string, std::vector<double>> ratios;
  for (const ImageRecord& im : ds.images) {
    if (!split.accepts(im.split)) continue;
    for (const InstanceRecord& r : im.instances) ratios[r.category(level)].push_back(aspect_ratio(r.obb));
  }
  ComplexityProfile p;
  p.corpus_id = std::string(to_string(ds.corpus_id));
  for (auto& [name, values] : ratios) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    p.rows.push_back({name, values.size(), sum / static_cast<double>(values.size()), percentile(values, 25.0),
                      percentile(values, 75.0)});
  }
  std::stable_sort(p.rows.begin(), p.rows.end(),
                   [](const ProfileRow& a, const ProfileRow& b) { return a.mean_ar > b.mean_ar; });
  return p;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace detail

inline constexpr std::string_view kProfileCsvHeader = "corpus,category,n,mean_ar,p25_ar,p75_ar";

inline std::string emit_profile_csv(const ComplexityProfile& p) {
  std::string out = std::string(kProfileCsvHeader) + "\n";
  for (const ProfileRow& r : p.rows) {
    out += detail::csv_field(p.corpus_id) + "," + detail::csv_field(r.category) + "," + std::to_string(r.n) + "," +
           detail::fixed6(r.mean_ar) + "," + detail::fixed6(r.p25_ar) + "," + detail::fixed6(r.p75_ar) + "\n";
  }
  return out;
}

inline std::string emit_profile_csv(const std::vector<ComplexityProfile>& profiles) {
  std::string out = std::string(kProfileCsvHeader) + "\n";
  for (const ComplexityProfile& p : profiles) out += emit_profile_csv(p).substr(kProfileCsvHeader.size() + 1);
  return out;
}

/// Reads CSV written by emit_profile_csv; rows are grouped by corpus in
/// order of first appearance.
inline std::vector<ComplexityProfile> parse_profile_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kProfileCsvHeader) throw ParseError("profile CSV: bad header");
  std::vector<ComplexityProfile> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 6) throw ParseError("profile CSV: expected 6 fields in '" + line + "'");
    if (out.empty() || out.back().corpus_id != f[0]) out.push_back({f[0], {}});
    try {
      out.back().rows.push_back({f[1], std::stoul(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
    } catch (const std::exception&) {
      throw ParseError("profile CSV: bad number in '" + line + "'");
    }
  }
  return out;
}

/// Vertical log10 axis mapping ratios in [lo, hi] onto [bottom, top] pixels.
struct LogAxis {
  double lo = 1.0;
  double hi = 10.0;
  double top = 0.0;
  double bottom = 100.0;

  double position(double ratio) const {
    const double t = (std::log10(ratio) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return bottom - t * (bottom - top);
  }
};

/// Axis spanning 1 .. next power of ten above the largest p75 (at least 10).
inline LogAxis profile_axis(const std::vector<ComplexityProfile>& profiles, double top, double bottom) {
  double max_ratio = 1.0;
  for (const ComplexityProfile& p : profiles) {
    for (const ProfileRow& r : p.rows) max_ratio = std::max({max_ratio, r.p75_ar, r.mean_ar});
  }
  const double decades = std::max(1.0, std::ceil(std::log10(max_ratio) - 1e-12));
  return {1.0, std::pow(10.0, decades), top, bottom};
}

/// Standalone SVG: categories along x grouped by corpus, log-scaled aspect
/// ratio on y, three marks per category (p25 and p75 ticks joined by a
/// whisker, mean as a dot).
inline std::string emit_profile_svg(const std::vector<ComplexityProfile>& profiles) {
  if (profiles.empty()) throw DataError("profile SVG needs at least one profile");
  constexpr double kLeft = 70.0, kTop = 30.0, kPlotH = 300.0, kSlot = 28.0, kGroupGap = 24.0;
  const LogAxis axis = profile_axis(profiles, kTop, kTop + kPlotH);
  auto f2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      switch (c) {
        case '&': o += "&amp;"; break;
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
      }
    }
    return o;
  };

  std::size_t slots = 0;
  for (const ComplexityProfile& p : profiles) slots += p.rows.size();
  const double plot_w = static_cast<double>(slots) * kSlot + static_cast<double>(profiles.size()) * kGroupGap;
  const double width = kLeft + plot_w + 20.0;
  const double height = kTop + kPlotH + 150.0;

  std::string body;
  // y axis with decade grid lines
  for (double v = axis.lo; v <= axis.hi * (1 + 1e-9); v *= 10.0) {
    const double y = axis.position(v);
    body += "<line class=\"grid\" x1=\"" + f2(kLeft) + "\" y1=\"" + f2(y) + "\" x2=\"" + f2(kLeft + plot_w) +
            "\" y2=\"" + f2(y) + "\" stroke=\"#ddd\"/>\n";
    body += "<text x=\"" + f2(kLeft - 6) + "\" y=\"" + f2(y + 4) + "\" text-anchor=\"end\">" + f2(v) + "</text>\n";
  }
  body += "<line x1=\"" + f2(kLeft) + "\" y1=\"" + f2(kTop) + "\" x2=\"" + f2(kLeft) + "\" y2=\"" + f2(kTop + kPlotH) +
          "\" stroke=\"#000\"/>\n";
  body += "<text x=\"16\" y=\"" + f2(kTop + kPlotH / 2) + "\" transform=\"rotate(-90 16 " + f2(kTop + kPlotH / 2) +
          ")\" text-anchor=\"middle\">Aspect ratio (longer / shorter side, log scale)</text>\n";

  double x = kLeft + kGroupGap / 2.0;
  for (const ComplexityProfile& p : profiles) {
    const double group_start = x;
    for (const ProfileRow& r : p.rows) {
      const double cx = x + kSlot / 2.0;
      const double y25 = axis.position(r.p25_ar), y75 = axis.position(r.p75_ar), ym = axis.position(r.mean_ar);
      body += "<g class=\"category\" data-corpus=\"" + esc(p.corpus_id) + "\" data-category=\"" + esc(r.category) +
              "\">\n";
      body += "<line class=\"whisker\" x1=\"" + f2(cx) + "\" y1=\"" + f2(y75) + "\" x2=\"" + f2(cx) + "\" y2=\"" +
              f2(y25) + "\" stroke=\"#888\"/>\n";
      body += "<line class=\"mark p25\" x1=\"" + f2(cx - 6) + "\" y1=\"" + f2(y25) + "\" x2=\"" + f2(cx + 6) +
              "\" y2=\"" + f2(y25) + "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
      body += "<line class=\"mark p75\" x1=\"" + f2(cx - 6) + "\" y1=\"" + f2(y75) + "\" x2=\"" + f2(cx + 6) +
              "\" y2=\"" + f2(y75) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
      body += "<circle class=\"mark mean\" cx=\"" + f2(cx) + "\" cy=\"" + f2(ym) + "\" r=\"4\" fill=\"#000\"/>\n";
      body += "<text x=\"" + f2(cx) + "\" y=\"" + f2(kTop + kPlotH + 10) + "\" transform=\"rotate(60 " + f2(cx) + " " +
              f2(kTop + kPlotH + 10) + ")\" font-size=\"10\">" + esc(r.category) + "</text>\n";
      body += "</g>\n";
      x += kSlot;
    }
    body += "<text class=\"corpus\" x=\"" + f2((group_start + x) / 2.0) + "\" y=\"" + f2(kTop - 10) +
            "\" text-anchor=\"middle\" font-weight=\"bold\">" + esc(p.corpus_id) + "</text>\n";
    x += kGroupGap;
  }

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + f2(width) + "\" height=\"" +
         f2(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += body;
  svg += "</svg>\n";
  return svg;
}

}  // namespace folio
