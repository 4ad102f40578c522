#pragma once

// Diagnostic overlay: mask boundaries, fitted ellipses, PS axis, head tangent
// and HSD segment drawn into an RGB raster.

#include <cmath>
#include <numbers>

#include "aopkit/biometry.hpp"
#include "aopkit/io.hpp"

namespace aopkit {

namespace color {
inline constexpr io::Rgb ps_fill{70, 20, 20};
inline constexpr io::Rgb fh_fill{20, 50, 20};
inline constexpr io::Rgb ps_edge{255, 60, 60};
inline constexpr io::Rgb fh_edge{60, 220, 60};
inline constexpr io::Rgb ellipse{255, 220, 0};
inline constexpr io::Rgb axis{70, 140, 255};
inline constexpr io::Rgb tangent{255, 0, 255};
inline constexpr io::Rgb hsd{255, 255, 255};
}  // namespace color

inline void plot(Grid<io::Rgb>& img, Point p, io::Rgb c) {
  const int x = static_cast<int>(std::floor(p.x));
  const int y = static_cast<int>(std::floor(p.y));
  if (img.in_bounds(x, y)) img(x, y) = c;
}

inline void draw_segment(Grid<io::Rgb>& img, Point a, Point b, io::Rgb c) {
  const int n = std::max(1, static_cast<int>(std::ceil(4.0 * distance(a, b))));
  for (int i = 0; i <= n; ++i) plot(img, a + (static_cast<double>(i) / n) * (b - a), c);
}

inline void draw_ellipse(Grid<io::Rgb>& img, const Ellipse& e, io::Rgb c) {
  const int n = std::max(64, static_cast<int>(std::ceil(8.0 * std::numbers::pi * e.a)));
  for (int i = 0; i < n; ++i) plot(img, e.at_parameter(2.0 * std::numbers::pi * i / n), c);
}

inline Grid<io::Rgb> render_overlay(const LabelMask& labels, const BiometryResult& r) {
  Grid<io::Rgb> img(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) img[i] = color::ps_fill;
    if (labels[i] == 2) img[i] = color::fh_fill;
  }
  for (Pixel p : boundary_pixels(r.ps.closed_mask)) img(p.x, p.y) = color::ps_edge;
  for (Pixel p : boundary_pixels(r.fh.closed_mask)) img(p.x, p.y) = color::fh_edge;
  if (r.ps.used_ellipse && r.ps.ellipse) draw_ellipse(img, *r.ps.ellipse, color::ellipse);
  if (r.fh.used_ellipse && r.fh.ellipse) draw_ellipse(img, *r.fh.ellipse, color::ellipse);
  draw_segment(img, r.ps_proximal, r.ps_apex, color::axis);
  // extend the tangent line past the contact point
  const Point t = r.tangent_point - r.ps_apex;
  draw_segment(img, r.ps_apex, r.ps_apex + 1.3 * t, color::tangent);
  draw_segment(img, r.hsd_apex, r.hsd_head_point, color::hsd);
  return img;
}

}  // namespace aopkit
