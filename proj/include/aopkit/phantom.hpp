#pragma once

// Synthetic PS/FH scenes with closed-form biometry, and seeded perturbations
// (holes, protrusions, boundary jitter) of their rendered label masks.

#include <algorithm>
#include <array>
#include <numbers>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "aopkit/biometry.hpp"
#include "aopkit/ellipse.hpp"
#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"
#include "aopkit/rng.hpp"

namespace aopkit {

struct PhantomScene {
  Ellipse ps;
  Ellipse fh;
  int width = 512;
  int height = 512;
};

struct EllipseDistance {
  double distance = 0.0;
  Point closest;
};

/// Euclidean distance from an outside point to an ellipse. Newton iteration
/// on the parametric angle of the first-quadrant foot point, kept inside a
/// shrinking bisection bracket.
inline EllipseDistance point_ellipse_distance(const Ellipse& e, Point p) {
  const Point local = e.to_local(p);
  const double u = std::abs(local.x);
  const double v = std::abs(local.y);
  const double a = e.a, b = e.b;
  if (e.form(p) <= 1.0) throw InvalidArgument("point_ellipse_distance: point is not outside");
  // g(t) = (a^2 - b^2) sin t cos t - a u sin t + b v cos t, root in [0, pi/2].
  auto g = [&](double t) {
    return (a * a - b * b) * std::sin(t) * std::cos(t) - a * u * std::sin(t) + b * v * std::cos(t);
  };
  auto dg = [&](double t) {
    return (a * a - b * b) * std::cos(2 * t) - a * u * std::cos(t) - b * v * std::sin(t);
  };
  double lo = 0.0, hi = std::numbers::pi / 2;
  double t;
  if (g(lo) <= 0.0) {
    t = lo;
  } else if (g(hi) >= 0.0) {
    t = hi;
  } else {
    t = std::atan2(a * v, b * u);  // starting guess
    for (int it = 0; it < 200; ++it) {
      const double gt = g(t);
      if (gt == 0.0) break;
      if (gt > 0.0) lo = t; else hi = t;
      double next = t - gt / dg(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - t);
      t = next;
      // max(a, b) * step bounds the motion of the foot point.
      if (a * step < 1e-13 || hi - lo < 1e-16) break;
    }
  }
  Point foot{a * std::cos(t), b * std::sin(t)};
  foot.x = std::copysign(foot.x, local.x);
  foot.y = std::copysign(foot.y, local.y);
  return {distance(local, foot), e.from_local(foot)};
}

inline bool overlaps(const Ellipse& e1, const Ellipse& e2, double step = 0.25) {
  auto box = [](const Ellipse& e) {
    const double t = deg2rad(e.theta);
    const double hx = std::hypot(e.a * std::cos(t), e.b * std::sin(t));
    const double hy = std::hypot(e.a * std::sin(t), e.b * std::cos(t));
    return std::array<double, 4>{e.center.x - hx, e.center.y - hy, e.center.x + hx, e.center.y + hy};
  };
  const auto b1 = box(e1), b2 = box(e2);
  const double x0 = std::max(b1[0], b2[0]), y0 = std::max(b1[1], b2[1]);
  const double x1 = std::min(b1[2], b2[2]), y1 = std::min(b1[3], b2[3]);
  if (x0 > x1 || y0 > y1) return false;
  for (double y = std::floor(y0 / step) * step; y <= y1; y += step) {
    for (double x = std::floor(x0 / step) * step; x <= x1; x += step) {
      if (contains(e1, {x, y}) && contains(e2, {x, y})) return true;
    }
  }
  return false;
}

/// PS apex and proximal end: the major-axis endpoint nearer the FH center is
/// the apex.
inline AxisEndpoints scene_axis(const PhantomScene& s) {
  return orient_axis(s.ps.major_endpoints(), s.fh.center);
}

inline void validate_scene(const PhantomScene& s) {
  if (!s.ps.valid() || !s.fh.valid()) throw InvalidArgument("phantom ellipse parameters invalid");
  if (s.width < 1 || s.height < 1) throw InvalidArgument("phantom canvas must be >= 1x1");
  if (overlaps(s.ps, s.fh)) throw OverlapError("phantom PS and FH interiors overlap");
  if (contains(s.fh, scene_axis(s).apex)) throw OverlapError("phantom PS apex lies inside FH");
}

struct AnalyticBiometry {
  double aop = 0.0;
  double hsd = 0.0;
  Point apex;
  Point proximal;
  Point tangent;
  Point head_point;
};

inline AnalyticBiometry analytic_biometry(const PhantomScene& s) {
  validate_scene(s);
  AnalyticBiometry r;
  const auto axis = scene_axis(s);
  r.apex = axis.apex;
  r.proximal = axis.proximal;
  const auto [t1, t2] = external_tangents(s.fh, axis.apex);
  const double a1 = aop_angle(axis, t1);
  const double a2 = aop_angle(axis, t2);
  r.aop = std::max(a1, a2);
  r.tangent = a2 > a1 ? t2 : t1;
  const auto d = point_ellipse_distance(s.fh, axis.apex);
  r.hsd = d.distance;
  r.head_point = d.closest;
  return r;
}

inline LabelMask render(const PhantomScene& s) {
  LabelMask m(s.width, s.height);
  const BinaryMask ps = rasterize(s.ps, s.width, s.height);
  const BinaryMask fh = rasterize(s.fh, s.width, s.height);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = ps[i] ? 1 : (fh[i] ? 2 : 0);
  }
  return m;
}

/// Uniform scaling about the canvas origin.
inline PhantomScene scale_scene(const PhantomScene& s, double k) {
  auto sc = [k](const Ellipse& e) { return Ellipse{k * e.center, k * e.a, k * e.b, e.theta}; };
  return {sc(s.ps), sc(s.fh), static_cast<int>(std::lround(s.width * k)),
          static_cast<int>(std::lround(s.height * k))};
}

/// Rigid motion: rotate by `deg` about `pivot`, then translate by `shift`.
inline PhantomScene transform_scene(const PhantomScene& s, double deg, Point pivot, Point shift) {
  const double c = std::cos(deg2rad(deg)), sn = std::sin(deg2rad(deg));
  auto tr = [&](const Ellipse& e) {
    const Point d = e.center - pivot;
    const Point r{c * d.x - sn * d.y, sn * d.x + c * d.y};
    return Ellipse{pivot + r + shift, e.a, e.b, normalize_axis_angle(e.theta + deg)};
  };
  return {tr(s.ps), tr(s.fh), s.width, s.height};
}

struct SceneRanges {
  double ps_a_min = 25, ps_a_max = 45;
  double ps_b_min = 8, ps_b_max = 18;
  double fh_a_min = 60, fh_a_max = 110;
  double fh_b_min = 50, fh_b_max = 95;
  double aop_min = 95, aop_max = 170;
  double min_hsd = 5;     // pixels between the structures
  double margin = 12;     // pixels kept free along the canvas border
  int reference_size = 512;  // ranges are in pixels at this canvas size

  void validate() const {
    if (!(ps_a_min <= ps_a_max && ps_b_min <= ps_b_max && fh_a_min <= fh_a_max &&
          fh_b_min <= fh_b_max && aop_min <= aop_max) ||
        ps_b_min <= 0 || fh_b_min <= 0 || ps_b_min > ps_a_max || fh_b_min > fh_a_max ||
        aop_min <= 0 || aop_max > 180 || margin < 0) {
      throw InfeasibleRequest("phantom scene ranges are not ordered or not feasible");
    }
  }
};

/// Seeded random scene on a `size` x `size` canvas. Shapes are drawn at the
/// reference size and scaled.
inline PhantomScene random_scene(std::uint64_t seed, std::uint64_t index, int size = 512,
                                 const SceneRanges& rr = {}) {
  rr.validate();
  const double ref = rr.reference_size;
  for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
    rng::Stream r{seed, index, attempt, 0x5ce9eULL};
    const double ps_a = r.uniform(rr.ps_a_min, rr.ps_a_max);
    const double ps_b = r.uniform(rr.ps_b_min, std::min(rr.ps_b_max, ps_a));
    const double fh_a = r.uniform(rr.fh_a_min, rr.fh_a_max);
    const double fh_b = r.uniform(rr.fh_b_min, std::min(rr.fh_b_max, fh_a));
    const double ps_theta = r.uniform(0.0, 180.0);
    const double fh_theta = r.uniform(0.0, 180.0);
    // Forward direction of the PS axis (toward the head) may point either way.
    const double fwd = deg2rad(ps_theta) + (r.bernoulli(0.5) ? 0.0 : std::numbers::pi);
    const double psi = deg2rad(r.uniform(-60.0, 60.0));
    const double gap = r.uniform(rr.min_hsd, 2.0 * fh_a);

    PhantomScene s;
    s.width = s.height = static_cast<int>(std::lround(ref));
    s.ps = Ellipse{{0, 0}, ps_a, ps_b, ps_theta};
    const Point f{std::cos(fwd), std::sin(fwd)};
    const Point apex = ps_a * f;
    const Point dir{std::cos(fwd + psi), std::sin(fwd + psi)};
    // Slide the FH out along `dir` until the apex gap is `gap` (approximately;
    // the exact value is recomputed below).
    Ellipse fh{apex + (fh_a + gap) * dir, fh_a, fh_b, fh_theta};
    for (int k = 0; k < 60 && contains(fh, apex); ++k) fh.center = fh.center + 2.0 * dir;
    const double d0 = contains(fh, apex) ? 0.0 : point_ellipse_distance(fh, apex).distance;
    fh.center = fh.center + (gap - d0) * dir;
    s.fh = fh;

    // Center the pair on the canvas.
    auto extent = [](const Ellipse& e) {
      const double t = deg2rad(e.theta);
      return Point{std::hypot(e.a * std::cos(t), e.b * std::sin(t)),
                   std::hypot(e.a * std::sin(t), e.b * std::cos(t))};
    };
    const Point eps = extent(s.ps), efh = extent(s.fh);
    const double x0 = std::min(s.ps.center.x - eps.x, s.fh.center.x - efh.x);
    const double x1 = std::max(s.ps.center.x + eps.x, s.fh.center.x + efh.x);
    const double y0 = std::min(s.ps.center.y - eps.y, s.fh.center.y - efh.y);
    const double y1 = std::max(s.ps.center.y + eps.y, s.fh.center.y + efh.y);
    if (x1 - x0 > ref - 2 * rr.margin || y1 - y0 > ref - 2 * rr.margin) continue;
    const Point shift{ref / 2 - (x0 + x1) / 2 + r.uniform(-0.5, 0.5),
                      ref / 2 - (y0 + y1) / 2 + r.uniform(-0.5, 0.5)};
    s.ps.center = s.ps.center + shift;
    s.fh.center = s.fh.center + shift;

    try {
      validate_scene(s);
    } catch (const Error&) {
      continue;
    }
    const auto truth = analytic_biometry(s);
    if (truth.aop < rr.aop_min || truth.aop > rr.aop_max || truth.hsd < rr.min_hsd) continue;
    if (distance(truth.apex, s.ps.center + (ps_a * f)) > 1e-6) continue;  // apex flipped
    return size == s.width ? s : scale_scene(s, size / ref);
  }
  throw InfeasibleRequest("could not draw a phantom scene within the requested ranges");
}

enum class Target { ps, fh, any };

struct Perturbation {
  int holes = 0;
  double hole_radius_min = 2.0;
  double hole_radius_max = 4.5;
  Target hole_target = Target::any;
  int protrusions = 0;
  double protrusion_length_min = 15.0;  // outward reach beyond the boundary
  double protrusion_length_max = 40.0;
  double protrusion_width_min = 15.0;
  double protrusion_width_max = 15.0;
  Target protrusion_target = Target::fh;
  int boundary_noise = 0;  // jitter amplitude in pixels
  std::uint64_t seed = 0;

  bool is_identity() const { return holes == 0 && protrusions == 0 && boundary_noise == 0; }
  void validate() const {
    if (holes < 0 || protrusions < 0 || boundary_noise < 0 || hole_radius_min < 0 ||
        hole_radius_min > hole_radius_max || protrusion_length_min < 0 ||
        protrusion_length_min > protrusion_length_max || protrusion_width_min <= 0 ||
        protrusion_width_min > protrusion_width_max) {
      throw InvalidArgument("perturbation sizes must be nonnegative and ordered");
    }
  }
};

namespace detail {

inline std::uint8_t pick_class(Target t, rng::Stream& r) {
  switch (t) {
    case Target::ps: return 1;
    case Target::fh: return 2;
    default: return r.bernoulli(0.5) ? 1 : 2;
  }
}

inline std::vector<Pixel> class_pixels(const LabelMask& m, std::uint8_t c) {
  std::vector<Pixel> out;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y) == c) out.push_back({x, y});
  return out;
}

inline bool disk_all_class(const LabelMask& m, Point c, double r, std::uint8_t cls) {
  const int x0 = static_cast<int>(std::floor(c.x - r - 1)), x1 = static_cast<int>(std::ceil(c.x + r + 1));
  const int y0 = static_cast<int>(std::floor(c.y - r - 1)), y1 = static_cast<int>(std::ceil(c.y + r + 1));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (distance(pixel_center({x, y}), c) <= r && m.get_or(x, y, 0) != cls) return false;
  return true;
}

inline double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return distance(p, a + t * ab);
}

}  // namespace detail

/// Seeded perturbation. Holes are disks carved strictly inside a structure;
/// protrusions are capsules rooted on a boundary pixel and grown outward
/// along the local normal; boundary noise grows or shaves a disk of random
/// radius at every boundary pixel. Only background pixels are ever painted,
/// so structures never swap class.
inline LabelMask perturb(const LabelMask& m, const Perturbation& p) {
  p.validate();
  if (p.is_identity()) return m;
  LabelMask out = m;
  constexpr int kAttempts = 2000;

  for (int h = 0; h < p.holes; ++h) {
    rng::Stream r{p.seed, 0x401e5ULL, static_cast<std::uint64_t>(h)};
    const std::uint8_t cls = detail::pick_class(p.hole_target, r);
    const double radius = r.uniform(p.hole_radius_min, p.hole_radius_max);
    const auto pix = detail::class_pixels(out, cls);
    bool placed = false;
    for (int a = 0; a < kAttempts && !pix.empty() && !placed; ++a) {
      const Point c = pixel_center(pix[static_cast<std::size_t>(r.uniform_int(0, static_cast<long>(pix.size()) - 1))]);
      // Two pixels of structure all around keep the hole strictly interior.
      if (!detail::disk_all_class(out, c, radius + 2.0, cls)) continue;
      const int r0 = static_cast<int>(std::ceil(radius));
      for (int y = static_cast<int>(c.y) - r0 - 1; y <= static_cast<int>(c.y) + r0 + 1; ++y)
        for (int x = static_cast<int>(c.x) - r0 - 1; x <= static_cast<int>(c.x) + r0 + 1; ++x)
          if (distance(pixel_center({x, y}), c) <= radius) out(x, y) = 0;
      placed = true;
    }
    if (!placed) {
      throw InfeasibleRequest("cannot place a hole of radius " + std::to_string(radius) + " inside " +
                              structure_name(static_cast<Structure>(cls)));
    }
  }

  for (int k = 0; k < p.protrusions; ++k) {
    rng::Stream r{p.seed, 0x9207ULL, static_cast<std::uint64_t>(k)};
    const std::uint8_t cls = detail::pick_class(p.protrusion_target, r);
    const double length = r.uniform(p.protrusion_length_min, p.protrusion_length_max);
    const double width = r.uniform(p.protrusion_width_min, p.protrusion_width_max);
    const BinaryMask own = class_mask(out, cls);
    const auto boundary = boundary_pixels(own);
    bool placed = false;
    for (int a = 0; a < kAttempts && !boundary.empty() && !placed; ++a) {
      const Pixel q = boundary[static_cast<std::size_t>(r.uniform_int(0, static_cast<long>(boundary.size()) - 1))];
      // Local outward normal: away from the structure's mass nearby.
      Point mass{0, 0};
      int n = 0;
      for (int dy = -6; dy <= 6; ++dy)
        for (int dx = -6; dx <= 6; ++dx)
          if (own.get(q.x + dx, q.y + dy)) mass = mass + Point{double(dx), double(dy)}, ++n;
      const Point off = (1.0 / n) * mass;
      if (norm(off) < 1e-9) continue;
      const Point dir = (-1.0 / norm(off)) * off;
      const Point root = pixel_center(q) - (width / 2) * dir;
      const Point tip = pixel_center(q) + length * dir;
      const double rad = width / 2;
      // The capsule must stay on the canvas and keep clear of other classes.
      constexpr double kClearance = 5.0;
      const int x0 = static_cast<int>(std::floor(std::min(root.x, tip.x) - rad - kClearance - 1));
      const int x1 = static_cast<int>(std::ceil(std::max(root.x, tip.x) + rad + kClearance + 1));
      const int y0 = static_cast<int>(std::floor(std::min(root.y, tip.y) - rad - kClearance - 1));
      const int y1 = static_cast<int>(std::ceil(std::max(root.y, tip.y) + rad + kClearance + 1));
      bool ok = true;
      for (int y = y0; y <= y1 && ok; ++y) {
        for (int x = x0; x <= x1 && ok; ++x) {
          const double d = detail::segment_distance(pixel_center({x, y}), root, tip);
          if (d <= rad && !out.in_bounds(x, y)) ok = false;
          if (d <= rad + kClearance && out.get_or(x, y, 0) != 0 && out.get_or(x, y, 0) != cls) ok = false;
        }
      }
      if (!ok) continue;
      for (int y = std::max(0, y0); y <= std::min(out.height() - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(out.width() - 1, x1); ++x)
          if (out(x, y) == 0 && detail::segment_distance(pixel_center({x, y}), root, tip) <= rad)
            out(x, y) = cls;
      placed = true;
    }
    if (!placed) {
      throw InfeasibleRequest(std::string("cannot attach a protrusion to ") +
                              structure_name(static_cast<Structure>(cls)));
    }
  }

  if (p.boundary_noise > 0) {
    const LabelMask before = out;
    const int amp = p.boundary_noise;
    for (std::uint8_t cls : {std::uint8_t{1}, std::uint8_t{2}}) {
      const auto boundary = boundary_pixels(class_mask(before, cls));
      for (std::size_t i = 0; i < boundary.size(); ++i) {
        rng::Stream r{p.seed, 0xb0a7ULL, cls, static_cast<std::uint64_t>(i)};
        const long k = r.uniform_int(-amp, amp);
        if (k == 0) continue;
        const Pixel q = boundary[i];
        const double rad = std::abs(static_cast<double>(k));
        for (int dy = -amp; dy <= amp; ++dy) {
          for (int dx = -amp; dx <= amp; ++dx) {
            const int x = q.x + dx, y = q.y + dy;
            if (!out.in_bounds(x, y) || std::hypot(dx, dy) > rad) continue;
            if (k > 0 && before(x, y) == 0 && out(x, y) == 0) out(x, y) = cls;
            if (k < 0 && out(x, y) == cls) out(x, y) = 0;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace aopkit
