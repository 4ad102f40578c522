#pragma once

// Angle of progression (AoP) and head-symphysis distance (HSD).
//
// AoP is the angle at the PS apex between the ray back along the PS long axis
// (apex -> proximal end) and the ray from the apex to the point where a line
// from the apex touches the FH shape. Of the two touching lines, the one
// giving the larger angle is used. HSD is the shortest distance from the PS
// apex to the FH boundary, both taken from the hole-closed masks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "aopkit/ellipse.hpp"
#include "aopkit/errors.hpp"
#include "aopkit/morphology.hpp"
#include "aopkit/raster.hpp"
#include "aopkit/refine.hpp"

namespace aopkit {

/// Convex hull (monotone chain) without collinear points, counter-clockwise
/// in a y-up frame. Degenerate inputs return the distinct extreme points.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// True if p lies inside or on the convex polygon (counter-clockwise).
inline bool hull_contains(const std::vector<Point>& hull, Point p) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return hull[0] == p;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point a = hull[i];
    const Point b = hull[(i + 1) % hull.size()];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

/// Farthest pair of points, searched over the convex hull. Ties keep the
/// first pair found in hull order.
inline std::pair<Point, Point> diameter(const std::vector<Point>& pts) {
  if (pts.empty()) throw EmptyShape("diameter of an empty point set");
  const auto hull = convex_hull(pts);
  std::pair<Point, Point> best{hull.front(), hull.front()};
  double best_d2 = -1.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      const Point d = hull[i] - hull[j];
      const double d2 = dot(d, d);
      if (d2 > best_d2) {
        best_d2 = d2;
        best = {hull[i], hull[j]};
      }
    }
  }
  return best;
}

inline std::vector<Point> boundary_centers(const BinaryMask& m) {
  std::vector<Point> out;
  for (Pixel p : boundary_pixels(m)) out.push_back(pixel_center(p));
  return out;
}

struct AxisEndpoints {
  Point proximal;
  Point apex;
};

/// Orders two endpoints so that the apex is the one nearer `toward`.
inline AxisEndpoints orient_axis(std::pair<Point, Point> ends, Point toward) {
  if (distance(ends.second, toward) < distance(ends.first, toward)) {
    return {ends.first, ends.second};
  }
  return {ends.second, ends.first};
}

/// Long-axis endpoints of the closed mask (boundary diameter).
inline AxisEndpoints mask_axis_endpoints(const BinaryMask& closed, Point fh_centroid) {
  const auto pts = boundary_centers(closed);
  if (pts.empty()) throw EmptyShape("PS mask is empty");
  const auto ends = diameter(pts);
  if (ends.first == ends.second) throw EmptyShape("PS mask has no extent");
  return orient_axis(ends, fh_centroid);
}

/// Long-axis endpoints from the mask's second moments: the principal axis
/// through the centroid, cut where it leaves the mask (pixel-edge precision
/// of `step`).
inline AxisEndpoints mask_principal_axis(const BinaryMask& closed, Point toward,
                                         double step = 0.01) {
  const Point c = centroid(closed);
  double sxx = 0, sxy = 0, syy = 0;
  for (int y = 0; y < closed.height(); ++y) {
    for (int x = 0; x < closed.width(); ++x) {
      if (!closed.at(x, y)) continue;
      const double dx = x + 0.5 - c.x, dy = y + 0.5 - c.y;
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
  }
  const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const Point d{std::cos(phi), std::sin(phi)};
  auto exit_point = [&](Point dir) {
    double t = 0.0;
    for (;;) {
      const Point p = c + (t + step) * dir;
      if (!closed.get(static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y)))) {
        return c + t * dir;
      }
      t += step;
    }
  };
  const Point e1 = exit_point(-1.0 * d);
  const Point e2 = exit_point(d);
  if (e1 == e2) throw EmptyShape("mask has no extent along its principal axis");
  return orient_axis({e1, e2}, toward);
}

/// PS long-axis endpoints from the representation chosen by refinement.
inline AxisEndpoints ps_axis_endpoints(const RefinedShape& ps, Point fh_centroid) {
  if (ps.empty()) throw EmptyShape("PS shape is empty");
  if (ps.used_ellipse && ps.ellipse) return orient_axis(ps.ellipse->major_endpoints(), fh_centroid);
  return mask_axis_endpoints(ps.closed_mask, fh_centroid);
}

struct AopResult {
  double degrees = 0.0;
  Point tangent;
  AxisEndpoints axis;
};

/// Angle in degrees between the rays apex->proximal and apex->t.
inline double aop_angle(const AxisEndpoints& axis, Point t) {
  const Point back = axis.proximal - axis.apex;
  const Point ray = t - axis.apex;
  return rad2deg(std::atan2(std::abs(cross(back, ray)), dot(back, ray)));
}

inline constexpr double kSupportTolerance = 1e-6;

/// True if no point of `pts` lies strictly on the other side of the line
/// apex-t than the rest, within `tol` (cross product scaled to pixels).
inline bool is_supporting_line(Point apex, Point t, const std::vector<Point>& pts,
                               double tol = kSupportTolerance) {
  const Point dir = t - apex;
  const double len = norm(dir);
  if (len == 0.0) return false;
  bool pos = false, neg = false;
  for (Point p : pts) {
    const double s = cross(dir, p - apex) / len;
    if (s > tol) pos = true;
    if (s < -tol) neg = true;
  }
  return !(pos && neg);
}

/// The two hull vertices at the extreme angles seen from `apex`.
inline std::pair<Point, Point> hull_tangents(const std::vector<Point>& hull, Point apex,
                                             Point reference) {
  const Point w = reference - apex;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Point plo{}, phi{};
  for (Point h : hull) {
    const Point v = h - apex;
    const double s = std::atan2(cross(w, v), dot(w, v));
    if (s < lo) {
      lo = s;
      plo = h;
    }
    if (s > hi) {
      hi = s;
      phi = h;
    }
  }
  return {plo, phi};
}

/// AoP from the refined PS and FH shapes. The FH contact point is taken on the
/// fitted ellipse when refinement selected it, otherwise on the convex hull of
/// the closed FH mask.
inline AopResult compute_aop(const RefinedShape& ps, const RefinedShape& fh) {
  if (ps.empty()) throw EmptyShape("PS shape is empty");
  if (fh.empty()) throw EmptyShape("FH shape is empty");
  const Point fh_center = fh.used_ellipse && fh.ellipse ? fh.ellipse->center : centroid(fh.closed_mask);
  AopResult r;
  r.axis = ps_axis_endpoints(ps, centroid(fh.closed_mask));
  const Point apex = r.axis.apex;

  std::pair<Point, Point> cand;
  if (fh.used_ellipse && fh.ellipse) {
    if (contains(*fh.ellipse, apex)) throw OverlapError("PS apex lies inside the FH ellipse");
    cand = external_tangents(*fh.ellipse, apex);
  } else {
    const auto hull = convex_hull(boundary_centers(fh.closed_mask));
    if (hull.size() < 3 || hull_contains(hull, apex)) {
      throw OverlapError("PS apex lies inside the FH shape");
    }
    cand = hull_tangents(hull, apex, fh_center);
    if (!is_supporting_line(apex, cand.first, hull) || !is_supporting_line(apex, cand.second, hull)) {
      throw Error("FH tangent failed the supporting-line check");
    }
  }
  const double a1 = aop_angle(r.axis, cand.first);
  const double a2 = aop_angle(r.axis, cand.second);
  if (a2 > a1) {
    r.degrees = a2;
    r.tangent = cand.second;
  } else {
    r.degrees = a1;
    r.tangent = cand.first;
  }
  return r;
}

struct HsdResult {
  double pixels = 0.0;
  Point head_point;
};

/// Shortest distance from `apex` to the FH boundary pixel centers. Equal
/// distances resolve to the first boundary pixel in row-major order.
inline HsdResult compute_hsd(const BinaryMask& ps_closed, const BinaryMask& fh_closed, Point apex) {
  if (count(ps_closed) == 0) throw EmptyShape("PS mask is empty");
  const auto boundary = boundary_pixels(fh_closed);
  if (boundary.empty()) throw EmptyShape("FH mask is empty");
  HsdResult r;
  double best = std::numeric_limits<double>::infinity();
  for (Pixel p : boundary) {
    const double d = distance(apex, pixel_center(p));
    if (d < best) {
      best = d;
      r.head_point = pixel_center(p);
    }
  }
  // Apex inside the FH region counts as contact.
  const int ax = static_cast<int>(std::floor(apex.x));
  const int ay = static_cast<int>(std::floor(apex.y));
  if (fh_closed.get(ax, ay)) best = 0.0;
  r.pixels = best;
  return r;
}

struct BiometryResult {
  double aop = 0.0;  // degrees
  double hsd = 0.0;  // pixels
  Point ps_apex;
  Point ps_proximal;
  Point tangent_point;
  Point hsd_apex;  // apex on the closed PS mask
  Point hsd_head_point;
  RefinedShape ps;
  RefinedShape fh;
};

/// Full per-frame measurement from a label mask.
inline BiometryResult measure_frame(const LabelMask& labels, const RefineParams& params = {}) {
  params.validate();
  auto isolate = [&](Structure s) {
    BinaryMask m = largest_component(class_mask(labels, s));
    if (count(m) == 0) {
      throw MissingStructure(std::string("missing structure: no ") + structure_name(s) + " pixels");
    }
    return m;
  };
  const BinaryMask ps_raw = isolate(Structure::ps);
  const BinaryMask fh_raw = isolate(Structure::fh);

  BiometryResult r;
  r.ps = refine(ps_raw, params);
  r.fh = refine(fh_raw, params);
  if (r.ps.empty()) throw EmptyShape("PS vanished after hole closing");
  if (r.fh.empty()) throw EmptyShape("FH vanished after hole closing");

  const auto aop = compute_aop(r.ps, r.fh);
  r.aop = aop.degrees;
  r.ps_apex = aop.axis.apex;
  r.ps_proximal = aop.axis.proximal;
  r.tangent_point = aop.tangent;

  const auto hsd_axis = mask_principal_axis(r.ps.closed_mask, centroid(r.fh.closed_mask));
  const auto hsd = compute_hsd(r.ps.closed_mask, r.fh.closed_mask, hsd_axis.apex);
  r.hsd_apex = hsd_axis.apex;
  r.hsd = hsd.pixels;
  r.hsd_head_point = hsd.head_point;
  return r;
}

}  // namespace aopkit
