#pragma once

// Canny edge detection on binary masks and edge-chain extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "aopkit/errors.hpp"
#include "aopkit/morphology.hpp"
#include "aopkit/raster.hpp"

namespace aopkit {

struct Gradient {
  Grid<double> gx;
  Grid<double> gy;
  Grid<double> magnitude;
};

/// 3x3 Sobel derivatives with zero padding outside the grid.
inline Gradient gradient(const Grid<std::uint8_t>& img) {
  const int w = img.width();
  const int h = img.height();
  Gradient g{Grid<double>(w, h), Grid<double>(w, h), Grid<double>(w, h)};
  auto v = [&](int x, int y) -> double { return img.get_or(x, y, 0); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (v(x + 1, y - 1) + 2 * v(x + 1, y) + v(x + 1, y + 1)) -
                        (v(x - 1, y - 1) + 2 * v(x - 1, y) + v(x - 1, y + 1));
      const double dy = (v(x - 1, y + 1) + 2 * v(x, y + 1) + v(x + 1, y + 1)) -
                        (v(x - 1, y - 1) + 2 * v(x, y - 1) + v(x + 1, y - 1));
      g.gx(x, y) = dx;
      g.gy(x, y) = dy;
      g.magnitude(x, y) = std::sqrt(dx * dx + dy * dy);
    }
  }
  return g;
}

inline constexpr double kCannyMinVal = 2.0;
inline constexpr double kCannyMaxVal = 5.0;

/// Mask rendered to {0, 255}.
inline Grid<std::uint8_t> to_intensity(const BinaryMask& m) {
  Grid<std::uint8_t> img(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) img[i] = m[i] ? 255 : 0;
  return img;
}

/// Sobel gradient, non-maximum suppression over four direction bins, then
/// hysteresis: magnitude > max_val is a sure edge, < min_val is dropped, and
/// anything between survives only when 8-connected to a sure edge.
///
/// When a pixel ties with a neighbor across the edge, the brighter (mask)
/// pixel wins; between equal intensities the earlier pixel wins. Edges of a
/// mask therefore sit on its inner boundary.
inline BinaryMask canny(const BinaryMask& m, double min_val = kCannyMinVal,
                        double max_val = kCannyMaxVal) {
  if (min_val > max_val) throw InvalidArgument("canny: minVal must not exceed maxVal");
  const int w = m.width();
  const int h = m.height();
  const auto img = to_intensity(m);
  const auto g = gradient(img);
  const double tan22 = std::tan(std::numbers::pi / 8.0);
  const double tan67 = std::tan(3.0 * std::numbers::pi / 8.0);

  auto mag = [&](int x, int y) { return g.magnitude.get_or(x, y, 0.0); };
  auto intensity = [&](int x, int y) -> int { return img.get_or(x, y, 0); };
  // True if p beats neighbor n; `n_after` says n comes later in row-major order.
  auto beats = [&](int x, int y, int nx, int ny, bool n_after) {
    const double mp = g.magnitude(x, y);
    const double mn = mag(nx, ny);
    if (mp != mn) return mp > mn;
    const int ip = intensity(x, y);
    const int in = intensity(nx, ny);
    if (ip != in) return ip > in;
    return n_after;
  };

  // 0 = none, 1 = weak, 2 = strong
  Grid<std::uint8_t> cls(w, h, 0);
  std::vector<Pixel> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double mp = g.magnitude(x, y);
      if (mp < min_val || mp == 0.0) continue;
      const double ax = std::abs(g.gx(x, y));
      const double ay = std::abs(g.gy(x, y));
      int dx = 0, dy = 0;
      if (ay <= tan22 * ax) {
        dx = 1;
      } else if (ay > tan67 * ax) {
        dy = 1;
      } else {
        dx = 1;
        dy = (g.gx(x, y) * g.gy(x, y) > 0) ? 1 : -1;
      }
      // (x+dx, y+dy) comes later in row-major order unless dy < 0.
      const bool fwd_after = dy > 0 || (dy == 0 && dx > 0);
      if (!beats(x, y, x + dx, y + dy, fwd_after) || !beats(x, y, x - dx, y - dy, !fwd_after)) {
        continue;
      }
      if (mp > max_val) {
        cls(x, y) = 2;
        stack.push_back({x, y});
      } else {
        cls(x, y) = 1;
      }
    }
  }
  BinaryMask edges(w, h);
  for (Pixel p : stack) edges(p.x, p.y) = 1;
  while (!stack.empty()) {
    const Pixel p = stack.back();
    stack.pop_back();
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const int nx = p.x + ox, ny = p.y + oy;
        if (cls.get_or(nx, ny, 0) == 1 && !edges(nx, ny)) {
          edges(nx, ny) = 1;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  return edges;
}

struct EdgeChain {
  std::vector<Pixel> points;
  bool closed = false;

  std::size_t size() const noexcept { return points.size(); }

  /// Pixel centers.
  std::vector<Point> centers() const {
    std::vector<Point> out;
    out.reserve(points.size());
    for (Pixel p : points) out.push_back(pixel_center(p));
    return out;
  }
};

inline bool adjacent8(Pixel a, Pixel b) {
  return a != b && std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1;
}

namespace detail {

inline bool row_major_less(Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; }

/// Tries to place a stray pixel into an existing chain without breaking
/// 8-adjacency of consecutive points.
inline bool absorb(std::vector<EdgeChain>& chains, Pixel p) {
  for (auto& c : chains) {
    auto& pts = c.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (adjacent8(pts[i], p) && adjacent8(pts[i + 1], p)) {
        pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(i) + 1, p);
        return true;
      }
    }
  }
  for (auto& c : chains) {
    auto& pts = c.points;
    if (adjacent8(pts.back(), p)) {
      pts.push_back(p);
      return true;
    }
    if (adjacent8(pts.front(), p)) {
      pts.insert(pts.begin(), p);
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Traces every 8-connected edge component. Walks are greedy: they start at
/// the pixel with the fewest untraced neighbors and always step to the
/// neighbor that is itself hardest to reach later (fewest untraced
/// neighbors, 4-neighbors before diagonals). Pixels left behind at junctions
/// are spliced into a walk where adjacency allows, otherwise they start their
/// own chain. Every edge pixel ends up in exactly one chain; an isolated
/// pixel forms a one-point chain.
inline std::vector<EdgeChain> extract_chains(const BinaryMask& edges) {
  Grid<int> labels;
  const auto comps = connected_components(edges, &labels);
  Grid<std::uint8_t> open(edges.width(), edges.height(), 0);
  for (std::size_t i = 0; i < edges.size(); ++i) open[i] = edges[i] ? 1 : 0;

  auto degree = [&](Pixel p) {
    int d = 0;
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        if ((ox || oy) && open.get_or(p.x + ox, p.y + oy, 0)) ++d;
      }
    }
    return d;
  };

  std::vector<EdgeChain> result;
  for (const auto& comp : comps) {
    std::vector<EdgeChain> local;
    std::vector<Pixel> strays;
    for (;;) {
      const Pixel* start = nullptr;
      int start_deg = 9;
      for (const Pixel& p : comp.pixels) {
        if (!open(p.x, p.y)) continue;
        const int d = degree(p);
        if (d < start_deg) {
          start = &p;
          start_deg = d;
        }
      }
      if (!start) break;
      std::vector<Pixel> walk{*start};
      open(start->x, start->y) = 0;
      for (;;) {
        const Pixel cur = walk.back();
        Pixel best{};
        bool found = false;
        int best_key = 1 << 30;
        for (int oy = -1; oy <= 1; ++oy) {
          for (int ox = -1; ox <= 1; ++ox) {
            if (!(ox || oy)) continue;
            const Pixel n{cur.x + ox, cur.y + oy};
            if (!open.get_or(n.x, n.y, 0)) continue;
            const int diagonal = (ox && oy) ? 1 : 0;
            const int key = degree(n) * 2 + diagonal;
            if (key < best_key) {
              best_key = key;
              best = n;
              found = true;
            }
          }
        }
        if (!found) break;
        open(best.x, best.y) = 0;
        walk.push_back(best);
      }
      if (walk.size() == 1) {
        strays.push_back(walk.front());
      } else {
        local.push_back({std::move(walk), false});
      }
    }
    for (Pixel p : strays) {
      if (!detail::absorb(local, p)) local.push_back({{p}, false});
    }
    for (auto& c : local) {
      c.closed = c.points.size() >= 3 && adjacent8(c.points.front(), c.points.back());
    }
    std::sort(local.begin(), local.end(),
              [](const EdgeChain& a, const EdgeChain& b) { return a.size() > b.size(); });
    for (auto& c : local) result.push_back(std::move(c));
  }
  return result;
}

/// Chain with the most points; ties go to the chain whose first point comes
/// first in row-major order.
inline const EdgeChain& longest_chain(const std::vector<EdgeChain>& chains) {
  if (chains.empty()) throw NoEdges("no edge chains found");
  const EdgeChain* best = &chains.front();
  for (const auto& c : chains) {
    if (c.size() > best->size() ||
        (c.size() == best->size() && detail::row_major_less(c.points.front(), best->points.front()))) {
      best = &c;
    }
  }
  return *best;
}

}  // namespace aopkit
