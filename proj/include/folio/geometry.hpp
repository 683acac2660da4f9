#pragma once

// Exact planar geometry for layout regions: hulls, minimum-area rectangles,
// convex clipping and IoU for axis-aligned and oriented boxes.
//
// Coordinates are image pixels (x to the right, y down). Orientation words
// (CCW, signed area) refer to the usual math convention on (x, y), i.e. a
// positive shoelace sum; on screen such a polygon appears clockwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace folio {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

/// Twice the signed area of triangle (o, a, b); > 0 when a->b turns left around o.
inline double orient(Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); }

using Polygon = std::vector<Point2>;

struct Aabb {
  double x = 0.0;  // left
  double y = 0.0;  // top
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

/// Oriented box. Canonical form: w >= h > 0, theta in [0, pi), and for
/// squares theta in [0, pi/2). theta rotates the w-axis from +x towards +y.
struct Obb {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;

  double area() const { return w * h; }

  friend bool operator==(const Obb&, const Obb&) = default;
};

namespace detail {

inline constexpr double kPi = std::numbers::pi;
// Relative tolerance under which two side lengths are treated as equal.
inline constexpr double kSquareTol = 1e-9;
// Angles this close to the end of their canonical range wrap to zero.
inline constexpr double kAngleSnap = 1e-12;

inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double wrap_angle(double theta, double period) {
  double t = std::fmod(theta, period);
  if (t < 0.0) t += period;
  if (t >= period - kAngleSnap || t < kAngleSnap) t = 0.0;
  return t;
}

}  // namespace detail

inline double signed_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

inline double polygon_area(const Polygon& poly) { return std::abs(signed_area(poly)); }

/// Drops consecutive duplicates (including a closing vertex equal to the first).
inline Polygon dedupe_consecutive(const Polygon& poly) {
  Polygon out;
  out.reserve(poly.size());
  for (const Point2& p : poly) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

/// Convex hull (Andrew's monotone chain). Counter-clockwise, no collinear
/// vertices, starting at the lexicographically smallest (x, y) vertex.
inline Polygon convex_hull(const Polygon& poly) {
  Polygon pts = poly;
  for (const Point2& p : pts) {
    if (!detail::finite(p)) throw GeometryError("non-finite coordinate");
  }
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw GeometryError("degenerate polygon");

  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw GeometryError("degenerate polygon");
  return hull;
}

/// Throws GeometryError unless the polygon has >= 3 distinct finite
/// vertices, no repeated consecutive vertex, non-zero signed area and a
/// non-degenerate hull.
inline void validate_polygon(const Polygon& poly) {
  if (poly.size() < 3) throw GeometryError("degenerate polygon: fewer than 3 vertices");
  for (const Point2& p : poly) {
    if (!detail::finite(p)) throw GeometryError("non-finite coordinate");
  }
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (poly[i] == poly[(i + 1) % poly.size()]) {
      throw GeometryError("degenerate polygon: repeated consecutive vertex");
    }
  }
  if (signed_area(poly) == 0.0) throw GeometryError("degenerate polygon: zero area");
  (void)convex_hull(poly);
}

inline Aabb aabb_of(const Polygon& poly) {
  if (poly.empty()) throw GeometryError("empty polygon");
  double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
  for (const Point2& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

/// Brings any rectangle description into canonical Obb form.
inline Obb canonical_obb(Obb b) {
  if (!(b.w > 0.0 && b.h > 0.0)) throw GeometryError("obb sides must be positive");
  if (b.w < b.h) {
    std::swap(b.w, b.h);
    b.theta += detail::kPi / 2.0;
  }
  b.theta = detail::wrap_angle(b.theta, detail::kPi);
  if (b.w - b.h <= detail::kSquareTol * b.w) {
    b.theta = detail::wrap_angle(b.theta, detail::kPi / 2.0);
  }
  return b;
}

/// Corners in CCW order: -u-v, +u-v, +u+v, -u+v with u along the w-axis.
inline std::array<Point2, 4> obb_corners(const Obb& b) {
  const Point2 u{std::cos(b.theta) * b.w / 2.0, std::sin(b.theta) * b.w / 2.0};
  const Point2 v{-std::sin(b.theta) * b.h / 2.0, std::cos(b.theta) * b.h / 2.0};
  const Point2 c{b.cx, b.cy};
  return {c - u - v, c + u - v, c + u + v, c - u + v};
}

inline std::array<Point2, 4> aabb_corners(const Aabb& b) {
  return {Point2{b.x, b.y}, Point2{b.right(), b.y}, Point2{b.right(), b.bottom()},
          Point2{b.x, b.bottom()}};
}

namespace detail {

struct CaliperCandidate {
  Obb box;
  double area;
};

// Rectangle flush with hull edge i, using the extreme-point indices found
// by the calipers.
inline CaliperCandidate flush_rectangle(const Polygon& hull, std::size_t i, std::size_t lo,
                                        std::size_t hi, std::size_t far) {
  const std::size_t n = hull.size();
  const Point2 origin = hull[i];
  const Point2 edge = hull[(i + 1) % n] - origin;
  const double len = std::hypot(edge.x, edge.y);
  const Point2 u{edge.x / len, edge.y / len};
  const Point2 nrm{-u.y, u.x};  // points into the hull for CCW order

  const double u_min = dot(hull[lo] - origin, u);
  const double u_max = dot(hull[hi] - origin, u);
  const double n_max = dot(hull[far] - origin, nrm);
  const Point2 center = origin + u * ((u_min + u_max) / 2.0) + nrm * (n_max / 2.0);
  Obb raw{center.x, center.y, u_max - u_min, n_max, std::atan2(u.y, u.x)};
  return {canonical_obb(raw), raw.w * raw.h};
}

}  // namespace detail

/// Minimum-area enclosing rectangle by rotating calipers over the convex
/// hull. One side is always collinear with a hull edge. Among equal-area
/// candidates the smallest canonical theta wins.
inline Obb min_area_obb(const Polygon& poly) {
  const Polygon hull = convex_hull(poly);
  const std::size_t n = hull.size();
  auto edge_dir = [&](std::size_t i) {
    const Point2 e = hull[(i + 1) % n] - hull[i];
    const double len = std::hypot(e.x, e.y);
    return Point2{e.x / len, e.y / len};
  };
  auto proj = [&](std::size_t k, Point2 dir) { return dot(hull[k], dir); };

  // Initial extreme points for edge 0.
  std::size_t hi = 0, lo = 0, far = 0;
  {
    const Point2 u = edge_dir(0);
    const Point2 nrm{-u.y, u.x};
    for (std::size_t k = 1; k < n; ++k) {
      if (proj(k, u) > proj(hi, u)) hi = k;
      if (proj(k, u) < proj(lo, u)) lo = k;
      if (proj(k, nrm) > proj(far, nrm)) far = k;
    }
  }

  detail::CaliperCandidate best{};
  bool have_best = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 u = edge_dir(i);
    const Point2 nrm{-u.y, u.x};
    while (proj((hi + 1) % n, u) > proj(hi, u)) hi = (hi + 1) % n;
    while (proj((far + 1) % n, nrm) > proj(far, nrm)) far = (far + 1) % n;
    while (proj((lo + 1) % n, u) < proj(lo, u)) lo = (lo + 1) % n;

    const detail::CaliperCandidate cand = detail::flush_rectangle(hull, i, lo, hi, far);
    if (!have_best) {
      best = cand;
      have_best = true;
      continue;
    }
    const double tol = 1e-12 * std::max(best.area, cand.area);
    if (cand.area < best.area - tol ||
        (std::abs(cand.area - best.area) <= tol && cand.box.theta < best.box.theta)) {
      best = cand;
    }
  }
  return best.box;
}

/// Convex ∩ convex by Sutherland-Hodgman. Both operands must be convex and
/// counter-clockwise. Returns an empty polygon when the overlap has no area.
inline Polygon clip_convex(const Polygon& subject, const Polygon& clipper) {
  Polygon out = subject;
  const std::size_t m = clipper.size();
  for (std::size_t j = 0; j < m && !out.empty(); ++j) {
    const Point2 a = clipper[j];
    const Point2 b = clipper[(j + 1) % m];
    Polygon in;
    in.swap(out);
    out.reserve(in.size() + 1);
    const std::size_t k = in.size();
    for (std::size_t i = 0; i < k; ++i) {
      const Point2 p = in[i];
      const Point2 q = in[(i + 1) % k];
      const double dp = orient(a, b, p);
      const double dq = orient(a, b, q);
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  out = dedupe_consecutive(out);
  if (out.size() < 3 || polygon_area(out) == 0.0) return {};
  return out;
}

inline double iou_aabb(const Aabb& a, const Aabb& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

namespace detail {

inline bool obb_less(const Obb& a, const Obb& b) {
  if (a.cx != b.cx) return a.cx < b.cx;
  if (a.cy != b.cy) return a.cy < b.cy;
  if (a.w != b.w) return a.w < b.w;
  if (a.h != b.h) return a.h < b.h;
  return a.theta < b.theta;
}

}  // namespace detail

/// Exact rotated IoU via convex clipping of the two corner quadrilaterals.
inline double iou_obb(const Obb& a, const Obb& b) {
  // Fixed operand order makes the result exactly symmetric.
  const Obb& s = detail::obb_less(b, a) ? b : a;
  const Obb& c = detail::obb_less(b, a) ? a : b;
  const auto sc = obb_corners(s);
  const auto cc = obb_corners(c);
  const Polygon inter = clip_convex(Polygon(sc.begin(), sc.end()), Polygon(cc.begin(), cc.end()));
  if (inter.empty()) return 0.0;
  const double ia = polygon_area(inter);
  const double uni = a.area() + b.area() - ia;
  return uni > 0.0 ? std::clamp(ia / uni, 0.0, 1.0) : 0.0;
}

inline double aspect_ratio(const Obb& b) { return b.w / b.h; }

}  // namespace folio
